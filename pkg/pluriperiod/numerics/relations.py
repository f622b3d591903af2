"""
Bilinear period relations on the fundamental polygon.

With Phi the Eichler integral of phi and psi a form of the same weight, the
boundary integral I(phi, psi) = int Phi psi d tau around the polygon vanishes,
and pairing each edge with its image reduces I to polynomial periods:

    int_{gamma_i} Phi psi + int_{gamma_i^-1} Phi psi = -int_{gamma_i} Omega_{alpha_i} psi

Edge traversal follows the vertex order tau_1 -> tau_2 -> ... -> tau_{4g+1}.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly

from pluriperiod.core.config import settings
from pluriperiod.core.errors import SignConventionMismatch, ToleranceNotMet
from pluriperiod.core.logging import get_logger
from pluriperiod.numerics.contour import Path, chord_path, integrate
from pluriperiod.numerics.eichler import (
    EichlerIntegral,
    PeriodCocycle,
    default_tol,
    iterated_antiderivative,
    period_polynomial,
)
from pluriperiod.numerics.forms import FormHandle
from pluriperiod.numerics.fuchsian import FundamentalOctagon, Group, edge_words, handle_offset
from pluriperiod.numerics.moebius import MoebiusMap
from pluriperiod.numerics.polyspace import BoundedPoly, poly_slash
from pluriperiod.utils.parallel import ordered_map

logger = get_logger(__name__)


@dataclass(frozen=True)
class Comparison:
    lhs: complex
    rhs: complex
    budget: float
    extra: Dict[str, object] = field(default_factory=dict)

    @property
    def abs_err(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def rel_err(self) -> float:
        return self.abs_err / max(abs(self.lhs), abs(self.rhs), 1e-300)

    @property
    def passed(self) -> bool:
        return self.abs_err <= self.budget


def bounded_defect(defect: float) -> float:
    if not defect <= settings.DEFECT_MAX:
        raise ToleranceNotMet(
            "automorphy defect above the ceiling for a budgeted comparison",
            {"defect": defect, "ceiling": settings.DEFECT_MAX},
        )
    return defect


def error_budget(defect: float, length: float, max_integrand: float, constant: float, tol: float = None) -> float:
    """constant * (defect + quadrature tolerance) * path length * max |integrand|."""
    tol = settings.TOL_EXACT if tol is None else tol
    return constant * (bounded_defect(defect) + tol) * length * max(max_integrand, 1.0)


def sample_max(f, path: Path, per_segment: int = 9) -> float:
    return float(np.max(np.abs(np.asarray(f(path.sample(per_segment))))))


def _tol(*forms: FormHandle) -> float:
    return max(default_tol(f) for f in forms)


def polygon_edges(O: FundamentalOctagon) -> List[Path]:
    return [chord_path(e.start, e.end) for e in O.edges]


def bilinear_integral(
    phi: FormHandle,
    psi: FormHandle,
    O: FundamentalOctagon,
    tau1: complex = None,
    reverse: bool = False,
    threads: Optional[int] = None,
) -> Comparison:
    tau1 = O.base_point if tau1 is None else complex(tau1)
    tol = _tol(phi, psi)
    Phi = iterated_antiderivative(phi, phi.m, tau1, tol)
    integrand = lambda z: Phi(z) * psi(z)

    edges = polygon_edges(O)
    if reverse:
        edges = [e.reverse() for e in reversed(edges)]
    parts = ordered_map(lambda path: (integrate(integrand, path, tol), sample_max(integrand, path)), edges, threads)
    total = sum((value for value, _ in parts), 0j)
    peak = max(p for _, p in parts)

    defect = phi.defect_estimate + psi.defect_estimate
    budget = error_budget(defect, O.perimeter(), peak, settings.BUDGET_STOKES, tol)
    logger.info("I(phi, psi) = %.3e (budget %.3e)", abs(total), budget)
    return Comparison(total, 0j, budget, {"max_integrand": peak, "defect": defect})


def paired_segment_reduction(
    Phi: EichlerIntegral, psi: FormHandle, A: MoebiusMap, start: complex, end: complex, omega: BoundedPoly
) -> Comparison:
    """Segment start->end plus its reversed image A(end)->A(start), against -int Omega_A psi."""
    tol = Phi.tol
    segment = chord_path(start, end)
    image = chord_path(A(end), A(start))
    integrand = lambda z: Phi(z) * psi(z)
    lhs = integrate(integrand, segment, tol) + integrate(integrand, image, tol)
    rhs = -integrate(lambda z: omega(z) * psi(z), segment, tol)

    peak = max(sample_max(integrand, segment), sample_max(integrand, image))
    length = segment.length + image.length
    budget = error_budget(
        Phi.form.defect_estimate + psi.defect_estimate, length, peak, settings.BUDGET_DIRECT, tol
    )
    return Comparison(lhs, rhs, budget)


def edge_pair_reduction(
    Phi: EichlerIntegral,
    psi: FormHandle,
    O: FundamentalOctagon,
    G: Group,
    i: int,
    cocycle: Optional[PeriodCocycle] = None,
) -> Comparison:
    edge = O.edge(i)
    A = G.word_to_matrix(edge.pairing)
    omega = cocycle.direct(edge.pairing) if cocycle is not None else period_polynomial(Phi, A)
    return paired_segment_reduction(Phi, psi, A, edge.start, edge.end, omega)


def edge_moment(psi: FormHandle, O: FundamentalOctagon, i: int, mu: int, tol: float = None) -> complex:
    edge = O.edge(i)
    tol = default_tol(psi) if tol is None else tol
    return integrate(lambda s: s ** mu * psi(s), chord_path(edge.start, edge.end), tol)


def moment_factor(D: int, mu: int) -> int:
    return (-1) ** mu * math.factorial(mu) * math.factorial(D - mu)


def edge_moment_via_cocycle(C: PeriodCocycle, O: FundamentalOctagon, i: int, mu: int) -> complex:
    """Edge moment from the period coefficients at the words bounding the edge.

    int_{W^-1 tau1}^{tau1} sigma^mu psi = (-1)^mu mu! (D - mu)! c'_{D-mu}(W), so an
    edge between W^-1 tau1 and V^-1 tau1 carries the difference of the two.
    """
    D = C.degree
    if not 0 <= mu <= D:
        raise ValueError(f"moment index must lie in 0..{D}")
    handle, offset = handle_offset(i, O.genus)
    prefix, middle, last = edge_words(handle)
    start_word, end_word = (prefix, middle) if offset == 0 else (middle, last)
    start = C.compose_word(start_word)[D - mu]
    end = C.compose_word(end_word)[D - mu]
    return moment_factor(D, mu) * (start - end)


@dataclass
class EdgeMomentTable:
    degree: int
    values: Dict[Tuple[int, int], complex] = field(default_factory=dict)
    provenance: Dict[Tuple[int, int], str] = field(default_factory=dict)

    def __getitem__(self, key: Tuple[int, int]) -> complex:
        return self.values[key]

    def is_complete(self, genus: int) -> bool:
        return all(
            (i, mu) in self.values for i in range(1, 2 * genus + 1) for mu in range(self.degree + 1)
        )


def edge_moment_table(
    psi: FormHandle,
    O: FundamentalOctagon,
    cocycle: Optional[PeriodCocycle] = None,
    tol: float = None,
    threads: Optional[int] = None,
) -> EdgeMomentTable:
    D = -2 * psi.m
    table = EdgeMomentTable(D)
    keys = [(i, mu) for i in range(1, 2 * O.genus + 1) for mu in range(D + 1)]
    if cocycle is None:
        values = ordered_map(lambda key: edge_moment(psi, O, key[0], key[1], tol), keys, threads)
        source = "quadrature"
    else:
        values = [edge_moment_via_cocycle(cocycle, O, i, mu) for i, mu in keys]
        source = "cocycle-formula"
    for key, value in zip(keys, values):
        table.values[key] = value
        table.provenance[key] = source
    return table


def edge_moment_check(psi: FormHandle, C: PeriodCocycle, O: FundamentalOctagon, i: int, mu: int) -> Comparison:
    """Quadrature against the cocycle formula; a match only after negation is a convention error."""
    quad = edge_moment(psi, O, i, mu)
    formula = edge_moment_via_cocycle(C, O, i, mu)
    edge = chord_path(O.edge(i).start, O.edge(i).end)
    peak = sample_max(lambda s: s ** mu * psi(s), edge)
    budget = error_budget(psi.defect_estimate, edge.length, peak, settings.BUDGET_DIRECT, default_tol(psi))
    result = Comparison(quad, formula, budget)
    if not result.passed and abs(quad + formula) <= budget:
        raise SignConventionMismatch(
            "edge moment matches only after a global sign flip",
            {"i": i, "mu": mu, "quadrature": [quad.real, quad.imag]},
        )
    return result


def coefficient_relation_check(
    C_phi: PeriodCocycle, moments: EdgeMomentTable, O: FundamentalOctagon
) -> Comparison:
    """-sum_i sum_mu c_mu(alpha_i) M(gamma_i, mu) + c_mu(beta_i) M(gamma_{i+g}, mu) against zero."""
    g = O.genus
    D = C_phi.degree
    terms = []
    for i in range(1, g + 1):
        alpha = C_phi.generator(f"a{i}")
        beta = C_phi.generator(f"b{i}")
        for mu in range(D + 1):
            terms.append(alpha[mu] * moments[(i, mu)])
            terms.append(beta[mu] * moments[(i + g, mu)])
    total = -sum(terms)
    largest = max((abs(t) for t in terms), default=0.0)
    residual = abs(total) / largest if largest else 0.0
    budget = error_budget(C_phi.form.defect_estimate, O.perimeter(), largest, settings.BUDGET_CANCELLATION, C_phi.tol)
    return Comparison(total, 0j, budget, {"relative_residual": residual, "largest_term": largest})


def twist_expand(omega: BoundedPoly, A: MoebiusMap, m: int, n: int) -> BoundedPoly:
    """Omega (c tau + d)^(2m - 2n), a polynomial of degree <= -2n."""
    if not 2 * m - 2 * n > 0:
        raise ValueError("twist needs n < m")
    factor = npoly.polypow(np.array([A.d, A.c], dtype=complex), 2 * m - 2 * n)
    return BoundedPoly.from_coeffs(npoly.polymul(omega.relabel(-2 * m).as_array(), factor), -2 * n)


def inverse_period(omega: BoundedPoly, A: MoebiusMap, m: int) -> BoundedPoly:
    return -poly_slash(omega, A.inverse(), -2 * m)


def cross_weight_segment(
    omega: BoundedPoly, A: MoebiusMap, m: int, psi: FormHandle, start: complex, end: complex, defect: float = 0.0
) -> Comparison:
    """int_s Omega_A (c tau + d)^(2m-2n) psi against int_{A s reversed} Omega_{A^-1} psi."""
    n = psi.m
    tol = default_tol(psi)
    twisted = twist_expand(omega, A, m, n)
    inverse = inverse_period(omega, A, m)
    segment = chord_path(start, end)
    image = chord_path(A(end), A(start))

    lhs_integrand = lambda z: twisted(z) * psi(z)
    lhs = integrate(lhs_integrand, segment, tol)
    rhs = integrate(lambda z: inverse(z) * psi(z), image, tol)

    nodes = segment.sample(17)
    pulled = -inverse(A(nodes)) * A.automorphy_factor(nodes) ** (-2 * n)
    algebraic = float(np.max(np.abs(twisted(nodes) - pulled)) / (1.0 + np.max(np.abs(pulled))))

    peak = max(sample_max(lhs_integrand, segment), sample_max(lambda z: inverse(z) * psi(z), image))
    budget = error_budget(
        defect + psi.defect_estimate, segment.length + image.length, peak, settings.BUDGET_DIRECT, tol
    )
    return Comparison(lhs, rhs, budget, {"algebraic_residual": algebraic})


def cross_weight_relation(
    C_phi: PeriodCocycle, psi: FormHandle, O: FundamentalOctagon, G: Group, i: int
) -> Comparison:
    if not psi.m < C_phi.m:
        raise ValueError("cross-weight relation needs n < m")
    edge = O.edge(i)
    A = G.word_to_matrix(edge.pairing)
    omega = C_phi.direct(edge.pairing)
    return cross_weight_segment(
        omega, A, C_phi.m, psi, edge.start, edge.end, C_phi.form.defect_estimate
    )


def relation_vector(C_phi: PeriodCocycle, psi_m: int, O: FundamentalOctagon, G: Group, i: int) -> np.ndarray:
    Dn = -2 * psi_m
    edge = O.edge(i)
    A = G.word_to_matrix(edge.pairing)
    omega = C_phi.direct(edge.pairing)
    row = np.zeros((len(O.edges), Dn + 1), dtype=complex)
    row[edge.index] = twist_expand(omega, A, C_phi.m, psi_m).as_array()
    row[edge.partner] = -inverse_period(omega, A, C_phi.m).relabel(Dn).as_array()
    return row.reshape(-1)


def cross_weight_independence(C_phi: PeriodCocycle, psi_m: int, O: FundamentalOctagon, G: Group) -> int:
    rows = np.array([relation_vector(C_phi, psi_m, O, G, i) for i in range(1, 2 * O.genus + 1)])
    return int(np.linalg.matrix_rank(rows, tol=settings.RANK_REL_THRESHOLD * max(1.0, np.abs(rows).max())))
