import itertools
import math
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from pluriperiod.core.config import settings
from pluriperiod.core.errors import NotPolynomial, PluriperiodError
from pluriperiod.core.logging import get_logger
from pluriperiod.models.config import RunConfig
from pluriperiod.models.report import ClassicalRecord, CohomologyRecord, Report
from pluriperiod.numerics import cohomology, eichler, hyperelliptic, relations
from pluriperiod.numerics.contour import cauchy_derivative
from pluriperiod.numerics.forms import (
    FormHandle,
    cyclic_form,
    poincare_form,
    generator_defect,
    power_form,
    symmetrize,
    test_function,
)
from pluriperiod.numerics.fuchsian import (
    FundamentalOctagon,
    GroupWord,
    SurfaceGroup,
    cyclic_group,
    surface_group,
)
from pluriperiod.numerics.moebius import MoebiusMap
from pluriperiod.numerics.polyspace import BoundedPoly, fit_poly, poly_slash
from pluriperiod.utils.records import check_record, comparison_record, error_record, json_safe

logger = get_logger(__name__)

SUITES = (
    "bol",
    "antiderivative",
    "periods",
    "cocycle",
    "cohomology",
    "bilinear",
    "edge-moments",
    "cross-weight",
    "classical",
)

INVOLUTION = MoebiusMap(0.0, -1.0, 1.0, 0.0)
BOL_ORDERS = range(1, 9)
BOL_PASS = 1e-8
BOL_FAIL = 1e-2
RECONSTRUCTION_TOL = 1e-7
CLOSED_FORM_TOL = 1e-8
RANDOM_CURVES = 5


def cyclic_closed_form() -> BoundedPoly:
    """Period of z^-2 under diag(2, 1/2) with base point i."""
    return BoundedPoly.from_coeffs([3j / 8, -math.log(4.0), -1.5j], 2)


def closed_form_eichler(tau: complex) -> complex:
    """Eichler integral of z^-2 (m = -1) from i, principal logarithm."""
    return 0.5 * (-2 * tau * np.log(tau) - 1j * tau ** 2 + 1j * math.pi * tau - 1j)


class SuiteService:

    def __init__(self, config: RunConfig):
        self.config = config
        self.records: List[Dict[str, Any]] = []
        self._surface: Optional[Tuple[SurfaceGroup, FundamentalOctagon]] = None
        self._forms: Dict[Tuple[int, int, float], FormHandle] = {}
        self._cocycles: Dict[Tuple[int, int, float], eichler.PeriodCocycle] = {}

    def _octagon(self) -> Tuple[SurfaceGroup, FundamentalOctagon]:
        if self._surface is None:
            self._surface = surface_group(self.config.genus)
        return self._surface

    def _tau1(self) -> complex:
        G, O = self._octagon()
        return self.config.tau1_complex or O.base_point

    def _form(self, m: int, nu: int, R: float) -> FormHandle:
        key = (m, nu, R)
        if key not in self._forms:
            G, _ = self._octagon()
            self._forms[key] = poincare_form(G, m, nu, R, self.config.threads)
        return self._forms[key]

    def _cocycle(self, m: int, nu: int, R: float) -> eichler.PeriodCocycle:
        key = (m, nu, R)
        if key not in self._cocycles:
            G, _ = self._octagon()
            self._cocycles[key] = eichler.PeriodCocycle(
                self._form(m, nu, R), m, G, self._tau1(), tol=self.config.tol
            )
        return self._cocycles[key]

    def _check(self, check_id: str, params: Dict[str, Any], fn: Callable[[], Dict[str, Any]]) -> None:
        try:
            record = fn()
        except PluriperiodError as e:
            record = error_record(check_id, params, e)
        except Exception as e:
            logger.exception("check %s raised", check_id)
            record = error_record(check_id, params, e)
        record["check_id"] = check_id
        record["params"] = json_safe(params)
        level = "PASS" if record["pass"] else "FAIL"
        logger.info("%s %s", level, check_id)
        self.records.append(record)

    def run_bol(self) -> None:
        for m in (-1, -2):
            weight = 2 * m
            f = symmetrize(lambda z: np.exp(1j * z), INVOLUTION, 2, weight)
            critical = 1 - 2 * m
            for k in BOL_ORDERS:
                params = {"m": m, "k_prime": k}

                def run(k=k, f=f, m=m):
                    residual = eichler.bol_check(f, INVOLUTION, m, k)
                    ok = residual <= BOL_PASS if k == critical else residual >= BOL_FAIL
                    return check_record("", {}, lhs=residual, passed=ok, extra={"critical": k == critical})

                self._check(f"bol/m{m}/k{k}", params, run)

        lam = self.config.lam
        A = cyclic_group(lam).generator

        def cyclic_power():
            m = -1
            f = power_form(lam, -m)
            residual = eichler.bol_check(f, A, m, 1 - 2 * m, points=2j + 0.3 * np.exp(1j * np.linspace(0.3, 2.8, 10)))
            return check_record("", {}, lhs=residual, passed=residual <= BOL_PASS)

        self._check("bol/cyclic-power", {"lam": lam, "m": -1}, cyclic_power)

    def run_antiderivative(self) -> None:
        sources = {"one": lambda s: np.ones_like(s), "sigma": lambda s: s, "sigma^-2": lambda s: s ** -2.0}
        points = 3j + 0.5 * np.exp(2j * np.pi * (np.arange(10) + 0.25) / 10)

        for (name, phi), m in itertools.product(sources.items(), (-1, -2)):

            def run(phi=phi, m=m):
                Phi = eichler.iterated_antiderivative(phi, m, 1j, tol=1e-12)
                order = 1 - 2 * m
                worst = 0.0
                for z in points:
                    got = cauchy_derivative(Phi, z, order, 1.0)
                    want = complex(phi(np.asarray(z)))
                    worst = max(worst, abs(got - want) / abs(want))
                return check_record("", {}, lhs=worst, budget=RECONSTRUCTION_TOL, passed=worst <= RECONSTRUCTION_TOL)

            self._check(f"antiderivative/{name}/m{m}", {"phi": name, "m": m}, run)

        def closed_form():
            Phi = eichler.iterated_antiderivative(lambda s: s ** -2.0, -1, 1j)
            taus = [2j, 1 + 1j, -0.5 + 3j]
            worst = max(abs(Phi(t) - closed_form_eichler(t)) for t in taus)
            return check_record("", {}, lhs=worst, budget=CLOSED_FORM_TOL, passed=worst <= CLOSED_FORM_TOL)

        self._check("antiderivative/closed-form", {"phi": "sigma^-2", "m": -1}, closed_form)

    def run_periods(self) -> None:
        lam = 2.0
        A = cyclic_group(lam).generator
        form = cyclic_form(lam, -1)
        oracle = cyclic_closed_form()

        def via_fit():
            Phi = eichler.iterated_antiderivative(form, -1, 1j)
            poly = eichler.period_polynomial(Phi, A)
            err = poly.distance(oracle)
            return check_record("", {}, lhs=poly.coeffs, rhs=oracle.coeffs, abs_err=err, budget=CLOSED_FORM_TOL, passed=err <= CLOSED_FORM_TOL)

        def via_integral():
            poly = eichler.period_via_integral(form, -1, A, 1j)
            err = poly.distance(oracle)
            return check_record("", {}, lhs=poly.coeffs, rhs=oracle.coeffs, abs_err=err, budget=CLOSED_FORM_TOL, passed=err <= CLOSED_FORM_TOL)

        def identity():
            Phi = eichler.iterated_antiderivative(form, -1, 1j)
            poly = eichler.period_polynomial(Phi, MoebiusMap.identity())
            return check_record("", {}, lhs=poly.coeffs, passed=poly.is_zero())

        def negative_control():
            Phi = eichler.iterated_antiderivative(test_function(lambda s: np.exp(s), -1), -1, 1j)
            try:
                eichler.period_polynomial(Phi, A)
            except NotPolynomial as e:
                return check_record("", {}, lhs=e.detail.get("residual"), passed=True)
            return check_record("", {}, passed=False)

        def underfit():
            Phi = eichler.iterated_antiderivative(form, -1, 1j)
            fitted = eichler.period_fit(Phi, A)
            lower = fit_poly(list(fitted.samples), 1, holdout=list(fitted.holdout))
            ratio = lower.residual / max(fitted.fit.residual, 1e-300)
            return check_record("", {}, lhs=ratio, budget=1e2, passed=ratio >= 1e2)

        def base_point():
            old, new = 1j, 0.5 + 1.5j
            before = eichler.period_via_integral(form, -1, A, old)
            after = eichler.period_via_integral(form, -1, A, new)
            P = eichler.base_point_shift(form, -1, old, new)
            expected = poly_slash(P, A, 2) - P
            err = (after - before).distance(expected)
            return check_record("", {}, abs_err=err, budget=CLOSED_FORM_TOL, passed=err <= CLOSED_FORM_TOL)

        def routes_agree():
            m = self.config.m
            f = cyclic_form(self.config.lam, m)
            B = cyclic_group(self.config.lam).generator
            Phi = eichler.iterated_antiderivative(f, m, 1j)
            fit = eichler.period_polynomial(Phi, B)
            integral = eichler.period_via_integral(f, m, B, 1j)
            err = fit.distance(integral)
            return check_record("", {}, abs_err=err, budget=1e-7, passed=err <= 1e-7)

        params = {"lam": lam, "m": -1, "tau1": 1j}
        self._check("periods/closed-form/fit", params, via_fit)
        self._check("periods/closed-form/integral", params, via_integral)
        self._check("periods/identity", params, identity)
        self._check("periods/non-automorphic", params, negative_control)
        self._check("periods/degree-drop", params, underfit)
        self._check("periods/base-point-coboundary", params, base_point)
        self._check("periods/routes-agree", {"lam": self.config.lam, "m": self.config.m}, routes_agree)

    def run_cocycle(self) -> None:
        m, nu, R = self.config.m, self.config.seeds[0], self.config.radius
        params = {"m": m, "nu": nu, "R": R}
        G, _ = self._octagon()
        letters = [GroupWord(((name, e),)) for name, e in G.letters()]

        def budget() -> float:
            form = self._form(m, nu, R)
            defect = relations.bounded_defect(form.defect_estimate)
            return max(settings.PERIOD_FLOOR, settings.PERIOD_DEFECT_FACTOR * defect)

        def identity_pair():
            C = self._cocycle(m, nu, R)
            residual = eichler.verify_cocycle(C, letters[0], GroupWord())
            return check_record("", {}, lhs=residual, budget=0.0, passed=residual == 0.0)

        self._check("cocycle/identity", params, identity_pair)

        for A, B in itertools.product(letters, letters):

            def run(A=A, B=B):
                limit = budget()
                residual = eichler.verify_cocycle(self._cocycle(m, nu, R), A, B)
                return check_record("", {}, lhs=residual, budget=limit, passed=residual <= limit)

            self._check(f"cocycle/{A}/{B}".replace(" ", ""), dict(params, A=str(A), B=str(B)), run)

        def relator():
            limit = budget()
            residual = cohomology.relator_residual(self._cocycle(m, nu, R))
            return check_record("", {}, lhs=residual, budget=limit, passed=residual <= limit)

        self._check("cocycle/relator", params, relator)

    def run_cohomology(self) -> None:
        g = self.config.genus
        G, _ = self._octagon()

        for m in (-1, -2, -3):

            def run(m=m):
                record = CohomologyRecord(**cohomology.h1_record(G, m)).model_dump()
                expected = 2 * (1 - 2 * m) * (g - 1)
                ok = record["dimH1"] == expected and record["sv_gap"] >= settings.RANK_GAP_MIN
                return check_record("", {}, lhs=record["dimH1"], rhs=expected, passed=ok, extra=record)

            self._check(f"cohomology/dim/g{g}/m{m}", {"g": g, "m": m}, run)

        m = self.config.m
        D = -2 * m
        rng = np.random.default_rng(0)

        def structural():
            R = cohomology.relator_matrix(G, m)
            delta = cohomology.coboundary_matrix(G, m)
            err = float(np.max(np.abs(R @ delta)) / max(1.0, np.max(np.abs(R)) * np.max(np.abs(delta))))
            return check_record("", {}, lhs=err, budget=1e-10, passed=err <= 1e-10)

        def coboundary_recovered():
            P = BoundedPoly.from_coeffs(rng.normal(size=D + 1) + 1j * rng.normal(size=D + 1), D)
            vec = cohomology.coboundary_matrix(G, m) @ P.as_array()
            result = cohomology.coboundary_solve(G, m, vec)
            ok = result.is_coboundary and result.witness.distance(P) < 1e-6
            return check_record("", {}, abs_err=result.residual, passed=ok)

        def nontrivial_class():
            kernel = cohomology.CocycleSystem.build(G, m).cocycle_space()
            vec = kernel @ (rng.normal(size=kernel.shape[1]) + 1j * rng.normal(size=kernel.shape[1]))
            result = cohomology.coboundary_solve(G, m, vec)
            return check_record("", {}, abs_err=result.residual, passed=not result.is_coboundary)

        self._check("cohomology/coboundaries-are-cocycles", {"m": m}, structural)
        self._check("cohomology/coboundary-witness", {"m": m}, coboundary_recovered)
        self._check("cohomology/nontrivial-class", {"m": m}, nontrivial_class)

    def _seed_pairs(self) -> List[Tuple[int, int]]:
        return list(itertools.product(self.config.seeds, repeat=2))[:3]

    def run_bilinear(self) -> None:
        m, R = self.config.m, self.config.radius
        G, O = self._octagon()
        tau1 = self._tau1()
        threads = self.config.threads

        for a, b in self._seed_pairs():
            params = {"m": m, "R": R, "nu_phi": a, "nu_psi": b}

            def stokes(a=a, b=b):
                result = relations.bilinear_integral(
                    self._form(m, a, R), self._form(m, b, R), O, tau1, threads=threads
                )
                return comparison_record("", {}, result)

            def coefficients(a=a, b=b):
                psi = self._form(m, b, R)
                table = relations.edge_moment_table(psi, O, threads=threads)
                result = relations.coefficient_relation_check(self._cocycle(m, a, R), table, O)
                return comparison_record("", {}, result)

            self._check(f"bilinear/stokes/{a}-{b}", params, stokes)
            self._check(f"bilinear/coefficients/{a}-{b}", params, coefficients)

        def orientation():
            a, b = self._seed_pairs()[0]
            phi, psi = self._form(m, a, R), self._form(m, b, R)
            forward = relations.bilinear_integral(phi, psi, O, tau1)
            backward = relations.bilinear_integral(phi, psi, O, tau1, reverse=True)
            err = abs(forward.lhs + backward.lhs)
            limit = 2 * relations.error_budget(0.0, O.perimeter(), forward.extra["max_integrand"], 1.0, self.config.tol)
            return check_record("", {}, lhs=forward.lhs, rhs=-backward.lhs, abs_err=err, budget=limit, passed=err <= limit)

        def convergence():
            before = [generator_defect(self._form(m, nu, R), G) for nu in self.config.seeds]
            after = [generator_defect(self._form(m, nu, R + 2), G) for nu in self.config.seeds]
            ok = all(y < x for x, y in zip(before, after)) and max(after) <= settings.DEFECT_MAX
            return check_record(
                "", {}, lhs=max(before), rhs=max(after), budget=settings.DEFECT_MAX, passed=ok,
                extra={"defect_R": before, "defect_R_next": after},
            )

        self._check("bilinear/orientation", {"m": m, "R": R}, orientation)
        self._check("bilinear/convergence", {"m": m, "R": R, "R_next": R + 2}, convergence)

    def run_edge_moments(self) -> None:
        m, R = self.config.m, self.config.radius
        nu = self.config.seeds[-1]
        G, O = self._octagon()
        D = -2 * m

        for i in range(1, 2 * O.genus + 1):
            for mu in range(D + 1):

                def moment(i=i, mu=mu):
                    psi = self._form(m, nu, R)
                    result = relations.edge_moment_check(psi, self._cocycle(m, nu, R), O, i, mu)
                    return comparison_record("", {}, result)

                self._check(f"edge-moments/moment/{i}/{mu}", {"m": m, "R": R, "nu": nu, "i": i, "mu": mu}, moment)

        for i in range(1, 2 * O.genus + 1):

            def pair(i=i):
                a = self.config.seeds[0]
                phi, psi = self._form(m, a, R), self._form(m, nu, R)
                Phi = eichler.iterated_antiderivative(phi, m, self._tau1(), self.config.tol)
                result = relations.edge_pair_reduction(Phi, psi, O, G, i, self._cocycle(m, a, R))
                return comparison_record("", {}, result)

            self._check(f"edge-moments/pair-reduction/{i}", {"m": m, "R": R, "i": i}, pair)

        def cyclic_pair():
            lam = self.config.lam
            A = cyclic_group(lam).generator
            form = cyclic_form(lam, -1)
            Phi = eichler.iterated_antiderivative(form, -1, 1j)
            omega = eichler.period_via_integral(form, -1, A, 1j)
            result = relations.paired_segment_reduction(Phi, form, A, 1j, 1 + 1j, omega)
            return comparison_record("", {}, result)

        self._check("edge-moments/pair-reduction/cyclic", {"lam": self.config.lam, "m": -1}, cyclic_pair)

    def run_cross_weight(self) -> None:
        m, n, R = self.config.m, self.config.n, self.config.radius
        a, b = self.config.seeds[0], self.config.seeds[-1]
        G, O = self._octagon()

        for i in range(1, 2 * O.genus + 1):

            def run(i=i):
                result = relations.cross_weight_relation(self._cocycle(m, a, R), self._form(n, b, R), O, G, i)
                algebraic = result.extra["algebraic_residual"]
                record = comparison_record("", {}, result)
                record["pass"] = record["pass"] and algebraic <= 1e-10
                return record

            self._check(f"cross-weight/{i}", {"m": m, "n": n, "R": R, "i": i}, run)

        def independence():
            rank = relations.cross_weight_independence(self._cocycle(m, a, R), n, O, G)
            return check_record("", {}, lhs=rank, rhs=2 * O.genus, passed=True, extra={"independent": rank == 2 * O.genus})

        self._check("cross-weight/independence", {"m": m, "n": n, "R": R}, independence)

        def cyclic_segment():
            lam = self.config.lam
            A = cyclic_group(lam).generator
            omega = eichler.period_via_integral(cyclic_form(lam, m), m, A, 1j)
            result = relations.cross_weight_segment(omega, A, m, cyclic_form(lam, n), 1j, 1 + 1j)
            return comparison_record("", {}, result)

        def twist_scalar():
            lam = self.config.lam
            A = cyclic_group(lam).generator
            omega = eichler.period_via_integral(cyclic_form(lam, m), m, A, 1j)
            twisted = relations.twist_expand(omega, A, m, n)
            expected = omega.relabel(-2 * n).scale(A.d ** (2 * m - 2 * n))
            err = twisted.distance(expected)
            return check_record("", {}, abs_err=err, budget=1e-14, passed=err <= 1e-14)

        self._check("cross-weight/cyclic", {"lam": self.config.lam, "m": m, "n": n}, cyclic_segment)
        self._check("cross-weight/twist-scalar", {"lam": self.config.lam, "m": m, "n": n}, twist_scalar)

    def run_classical(self) -> None:
        curve = hyperelliptic.HyperellipticCurve()
        state: Dict[str, Any] = {}

        def relations_default():
            result = hyperelliptic.classical_relations(curve, threads=self.config.threads)
            state["P"] = result.period_matrix
            record = ClassicalRecord(**hyperelliptic.hyperelliptic_record(result)).model_dump()
            ok = result.rel1_residual < 1e-8 and result.rel2_min_eig > 0
            return check_record("", {}, lhs=result.rel1_residual, rhs=result.rel2_min_eig, passed=ok, extra=record)

        def negative_control():
            value = hyperelliptic.riemann_relation_2(hyperelliptic.flip_b_cycles(state["P"]))
            return check_record("", {}, lhs=value, passed=value < 0)

        def random_curves():
            rng = np.random.default_rng(0)
            residuals = [
                hyperelliptic.riemann_relation_1(hyperelliptic.random_curve(rng)) for _ in range(RANDOM_CURVES)
            ]
            return check_record("", {}, lhs=max(residuals), budget=1e-7, passed=max(residuals) < 1e-7)

        def symplectic_invariance():
            rng = np.random.default_rng(1)
            S = hyperelliptic.random_symplectic(rng)
            changed = hyperelliptic.symplectic_change(state["P"], S)
            rel1 = hyperelliptic.riemann_relation_1(changed)
            rel2 = hyperelliptic.riemann_relation_2(changed)
            return check_record("", {}, lhs=rel1, rhs=rel2, passed=rel1 < 1e-7 and rel2 > 0)

        def symmetry():
            P = hyperelliptic.period_matrix(hyperelliptic.symmetric_curve())
            scale = float(np.max(np.abs(P)))
            err = max(abs(P[1, 1]), abs(P[0, 2])) / scale
            return check_record("", {}, abs_err=err, budget=1e-8, passed=err < 1e-8)

        params = {"branch_points": list(curve.branch_points)}
        self._check("classical/relations", params, relations_default)
        self._check("classical/flipped-b-cycles", params, negative_control)
        self._check("classical/random-curves", {"count": RANDOM_CURVES, "seed": 0}, random_curves)
        self._check("classical/symplectic-invariance", params, symplectic_invariance)
        self._check("classical/symmetric-curve", {"branch_points": [-2.5, -1.5, -0.5, 0.5, 1.5, 2.5]}, symmetry)

    def run_suite(self) -> Report:
        started = time.perf_counter()
        suites = SUITES if self.config.suite == "all" else (self.config.suite,)
        logger.info("running suites: %s", ", ".join(suites))

        for suite in suites:
            getattr(self, f"run_{suite.replace('-', '_')}")()

        report = Report(
            suite=self.config.suite,
            config=self.config.model_dump(),
            checks=self.records,
            passed=bool(self.records) and all(r["pass"] for r in self.records),
            wall_clock_seconds=time.perf_counter() - started,
        )
        if self.config.out:
            Path(self.config.out).write_text(report.to_json())
            logger.info("report written to %s", self.config.out)
        return report


def run_suite(config: RunConfig) -> Report:
    return SuiteService(config).run_suite()
