"""
Eichler integrals and their period polynomials.

For a weight 2 - 2m form phi and D = -2m the Eichler integral based at tau1 is

    Phi(tau) = 1/D! * int_{tau1}^{tau} (tau - sigma)^D phi(sigma) d sigma

and the period of A is Omega_A = Phi|A - Phi with (F|A)(tau) = F(A tau)(c tau + d)^D,
a polynomial of degree at most D obeying Omega_AB = Omega_A|B + Omega_B.
"""
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Union

import numpy as np

from pluriperiod.core.config import settings
from pluriperiod.core.errors import DegreeOverflow, NotPolynomial
from pluriperiod.core.logging import get_logger
from pluriperiod.numerics.contour import cauchy_derivative, chord_path, integrate
from pluriperiod.numerics.forms import FormHandle, test_function
from pluriperiod.numerics.fuchsian import Group, GroupWord
from pluriperiod.numerics.moebius import MoebiusMap
from pluriperiod.numerics.polyspace import BoundedPoly, PolyFit, fit_nodes, fit_poly, poly_slash

logger = get_logger(__name__)

FormLike = Union[FormHandle, Callable[[np.ndarray], np.ndarray]]


def kernel_degree(m: int) -> int:
    if m > 0:
        raise ValueError(f"m must be <= 0, got {m}")
    D = -2 * m
    if D > settings.MAX_NEG_TWO_M:
        raise DegreeOverflow("kernel degree too large", {"D": D, "max": settings.MAX_NEG_TWO_M})
    return D


def as_form(phi: FormLike, m: int) -> FormHandle:
    return phi if isinstance(phi, FormHandle) else test_function(phi, m)


def default_tol(form: FormHandle) -> float:
    return settings.TOL_POINCARE if form.backend == "poincare" else settings.TOL_EXACT


def moments(phi: FormHandle, start: complex, end: complex, D: int, tol: float) -> np.ndarray:
    """int_start^end sigma^mu phi(sigma) d sigma for mu = 0..D along the chord."""
    if start == end:
        return np.zeros(D + 1, dtype=complex)
    path = chord_path(start, end)
    return np.array(
        [integrate(lambda s, mu=mu: s ** mu * phi(s), path, tol) for mu in range(D + 1)],
        dtype=complex,
    )


def kernel_poly(moment_values: np.ndarray, D: int) -> BoundedPoly:
    """1/D! int (tau - sigma)^D phi expanded in tau from the moments of phi."""
    coeffs = np.zeros(D + 1, dtype=complex)
    for mu in range(D + 1):
        coeffs[D - mu] = math.comb(D, mu) * (-1) ** mu * moment_values[mu] / math.factorial(D)
    return BoundedPoly.from_coeffs(coeffs, D)


@dataclass
class EichlerIntegral:
    form: FormHandle
    m: int
    tau1: complex
    tol: float

    @property
    def degree(self) -> int:
        return -2 * self.m

    def value(self, tau: complex) -> complex:
        tau = complex(tau)
        if tau == self.tau1:
            return 0j
        D = self.degree
        scale = 1.0 / math.factorial(D)
        kernel = lambda s: (tau - s) ** D * self.form(s)
        return scale * integrate(kernel, chord_path(self.tau1, tau), self.tol)

    def __call__(self, tau):
        arr = np.asarray(tau, dtype=complex)
        out = np.array([self.value(t) for t in arr.reshape(-1)], dtype=complex).reshape(arr.shape)
        return out if np.ndim(out) else complex(out)


def iterated_antiderivative(phi: FormLike, m: int, tau1: complex, tol: float = None) -> EichlerIntegral:
    kernel_degree(m)
    tau1 = complex(tau1)
    if not tau1.imag > 0:
        raise ValueError("base point must lie in the upper half-plane")
    form = as_form(phi, m)
    return EichlerIntegral(form=form, m=m, tau1=tau1, tol=default_tol(form) if tol is None else tol)


@dataclass(frozen=True)
class PeriodFit:
    fit: PolyFit
    relative_residual: float
    threshold: float
    samples: tuple
    holdout: tuple

    @property
    def poly(self) -> BoundedPoly:
        return self.fit.poly


def period_samples(Phi: EichlerIntegral, A: MoebiusMap, center: complex = None):
    D = Phi.degree
    nodes = fit_nodes(2 * (D + 3), center)
    values = Phi(A(nodes)) * A.automorphy_factor(nodes) ** D - Phi(nodes)
    pairs = list(zip(nodes.tolist(), values.tolist()))
    return pairs[0::2], pairs[1::2]


def period_fit(Phi: EichlerIntegral, A: MoebiusMap, center: complex = None) -> PeriodFit:
    D = Phi.degree
    samples, holdout = period_samples(Phi, A, center)
    fit = fit_poly(samples, D, holdout=holdout)
    scale = 1.0 + max(abs(v) for _, v in samples + holdout)
    threshold = max(settings.PERIOD_FLOOR, settings.PERIOD_DEFECT_FACTOR * Phi.form.defect_estimate)
    return PeriodFit(fit, fit.residual / scale, threshold, tuple(samples), tuple(holdout))


def period_polynomial(Phi: EichlerIntegral, A: MoebiusMap, center: complex = None) -> BoundedPoly:
    D = Phi.degree
    if A.distance(MoebiusMap.identity()) == 0.0:
        return BoundedPoly.zero(D)
    result = period_fit(Phi, A, center)
    if result.relative_residual > result.threshold:
        raise NotPolynomial(
            "period is not a polynomial of the expected degree",
            {"residual": result.relative_residual, "threshold": result.threshold, "degree": D},
        )
    logger.debug("period fit residual %.3g (threshold %.3g)", result.relative_residual, result.threshold)
    return result.poly


def period_via_integral(psi: FormLike, m: int, A: MoebiusMap, tau1: complex, tol: float = None) -> BoundedPoly:
    """Omega_A = 1/D! int_{A^-1 tau1}^{tau1} (tau - sigma)^D psi(sigma) d sigma."""
    D = kernel_degree(m)
    form = as_form(psi, m)
    if A.distance(MoebiusMap.identity()) == 0.0:
        return BoundedPoly.zero(D)
    tol = default_tol(form) if tol is None else tol
    tau1 = complex(tau1)
    start = A.inverse()(tau1)
    return kernel_poly(moments(form, start, tau1, D, tol), D)


def base_point_shift(phi: FormLike, m: int, old: complex, new: complex, tol: float = None) -> BoundedPoly:
    """P = Phi_new - Phi_old; periods change by the coboundary P|A - P."""
    D = kernel_degree(m)
    form = as_form(phi, m)
    tol = default_tol(form) if tol is None else tol
    return -kernel_poly(moments(form, complex(old), complex(new), D, tol), D)


@dataclass
class PeriodCocycle:
    form: FormHandle
    m: int
    group: Group
    tau1: complex
    route: str = "integral"
    tol: Optional[float] = None
    table: Dict[str, BoundedPoly] = field(default_factory=dict)

    def __post_init__(self):
        if self.route not in ("integral", "fit"):
            raise ValueError(f"unknown period route {self.route!r}")
        self.tol = default_tol(self.form) if self.tol is None else self.tol
        self._eichler = None

    @property
    def degree(self) -> int:
        return -2 * self.m

    def matrix(self, word: GroupWord) -> MoebiusMap:
        return self.group.word_to_matrix(word)

    def direct(self, word: GroupWord) -> BoundedPoly:
        key = str(word)
        if key in self.table:
            return self.table[key]
        if not len(word):
            poly = BoundedPoly.zero(self.degree)
        elif self.route == "integral":
            poly = period_via_integral(self.form, self.m, self.matrix(word), self.tau1, self.tol)
        else:
            if self._eichler is None:
                self._eichler = iterated_antiderivative(self.form, self.m, self.tau1, self.tol)
            poly = period_polynomial(self._eichler, self.matrix(word))
        self.table[key] = poly
        return poly

    def generator(self, name: str) -> BoundedPoly:
        return self.direct(GroupWord(((name, 1),)))

    def letter(self, name: str, exp: int) -> BoundedPoly:
        omega = self.generator(name)
        if exp == 1:
            return omega
        inv = self.group.word_to_matrix(GroupWord(((name, -1),)))
        return -poly_slash(omega, inv, self.degree)

    def compose_word(self, word: GroupWord) -> BoundedPoly:
        """Omega of a word from generator periods, Omega_uv = Omega_u|v + Omega_v."""
        acc = BoundedPoly.zero(self.degree)
        for name, exp in word.letters:
            step = self.group.word_to_matrix(GroupWord(((name, exp),)))
            acc = poly_slash(acc, step, self.degree) + self.letter(name, exp)
        return acc

    def __getitem__(self, word: GroupWord) -> BoundedPoly:
        return self.direct(word)


def verify_cocycle(C: PeriodCocycle, A: GroupWord, B: GroupWord) -> float:
    lhs = C.direct(A * B)
    rhs = poly_slash(C.direct(A), C.matrix(B), C.degree) + C.direct(B)
    return lhs.distance(rhs)


def bol_points(count: int = 10, center: complex = 1j, radius: float = 0.3) -> np.ndarray:
    theta = 2.0 * np.pi * (np.arange(count) + 0.5) / count
    return center + radius * np.exp(1j * theta)


def bol_check(
    f: FormLike,
    A: MoebiusMap,
    m: int,
    k_prime: int,
    points: Sequence[complex] = None,
    r: float = 0.25,
) -> float:
    """Residual of f^(k')(Az) = f^(k')(z) (cz+d)^(2m + 2k') for f of weight 2m."""
    if k_prime < 1:
        raise ValueError("derivative order must be at least 1")
    points = bol_points() if points is None else np.asarray(points, dtype=complex)
    exponent = 2 * m + 2 * k_prime
    worst = 0.0
    for z in points:
        lhs = cauchy_derivative(f, A(z), k_prime, r)
        rhs = cauchy_derivative(f, z, k_prime, r) * A.automorphy_factor(z) ** exponent
        worst = max(worst, abs(lhs - rhs) / (1.0 + abs(rhs)))
    return worst
