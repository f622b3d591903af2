"""
Genus-2 hyperelliptic curves y^2 = prod (x - e_k) with six real branch points,
their period matrix over a symplectic homology basis, and the two classical
Riemann bilinear relations.

Homology basis (loops are counter-clockwise circles):
    a_i  around [e_{2i-1}, e_{2i}]
    b_i  around [e_{2i}, e_5]

On each loop y is single valued; the branch is fixed so that it agrees with the
reference sheet y_ref = prod sqrt(x - e_k) (principal roots) at the top of the
circle.
"""
from dataclasses import dataclass
from typing import Callable, Dict, Sequence, Tuple

import numpy as np

from pluriperiod.core.config import settings
from pluriperiod.core.errors import BranchTrackingFailure
from pluriperiod.core.logging import get_logger
from pluriperiod.numerics.contour import circle_path, integrate
from pluriperiod.utils.parallel import ordered_map

logger = get_logger(__name__)

GENUS = 2
CYCLE_NAMES = ("a1", "a2", "b1", "b2")
DEFAULT_BRANCH_POINTS = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0)
BRANCH_TOL = 1e-8
TRACK_STEPS = 512


@dataclass(frozen=True)
class HyperellipticCurve:
    branch_points: Tuple[float, ...] = DEFAULT_BRANCH_POINTS

    def __post_init__(self):
        e = tuple(float(x) for x in self.branch_points)
        if len(e) != 2 * GENUS + 2:
            raise ValueError(f"expected {2 * GENUS + 2} branch points, got {len(e)}")
        if list(e) != sorted(e):
            raise ValueError("branch points must be increasing")
        if min(b - a for a, b in zip(e, e[1:])) <= 1e-6:
            raise ValueError("branch points must be distinct")
        object.__setattr__(self, "branch_points", e)

    @property
    def genus(self) -> int:
        return GENUS

    @property
    def coefficients(self) -> np.ndarray:
        return np.poly(self.branch_points)

    def f(self, x):
        return np.polyval(self.coefficients, x)

    def reference_y(self, x):
        x = np.asarray(x, dtype=complex)
        return np.prod(np.sqrt(x[..., None] - np.array(self.branch_points)), axis=-1)

    def cycles(self) -> Dict[str, Tuple[int, int]]:
        last = 2 * GENUS
        out = {}
        for i in range(1, GENUS + 1):
            out[f"a{i}"] = (2 * i - 2, 2 * i - 1)
        for i in range(1, GENUS + 1):
            out[f"b{i}"] = (2 * i - 1, last)
        return out


@dataclass(frozen=True)
class Loop:
    lo: int
    hi: int
    center: float
    radius: float


def loop_around(curve: HyperellipticCurve, lo: int, hi: int) -> Loop:
    e = curve.branch_points
    gaps = []
    if lo > 0:
        gaps.append(e[lo] - e[lo - 1])
    if hi < len(e) - 1:
        gaps.append(e[hi + 1] - e[hi])
    margin = 0.5 * min(gaps) if gaps else 1.0
    return Loop(lo, hi, 0.5 * (e[lo] + e[hi]), 0.5 * (e[hi] - e[lo]) + margin)


def loop_branch(curve: HyperellipticCurve, loop: Loop) -> Callable[[np.ndarray], np.ndarray]:
    """Analytic branch of y on the loop, matched to the reference sheet at the top point."""
    e = np.array(curve.branch_points)
    inside = e[loop.lo: loop.hi + 1]
    left = e[: loop.lo]
    right = e[loop.hi + 1:]
    if len(inside) % 2:
        raise BranchTrackingFailure("loop encloses an odd number of branch points", {"lo": loop.lo, "hi": loop.hi})

    def raw(x):
        x = np.asarray(x, dtype=complex)[..., None]
        val = np.prod(np.sqrt(x - inside), axis=-1)
        if len(left):
            val = val * np.prod(np.sqrt(x - left), axis=-1)
        if len(right):
            val = val * np.prod(1j * np.sqrt(right - x), axis=-1)
        return val

    top = loop.center + 1j * loop.radius
    ratio = complex(curve.reference_y(top) / raw(top))
    sign = 1.0 if ratio.real > 0 else -1.0
    if abs(ratio - sign) > BRANCH_TOL:
        raise BranchTrackingFailure("loop branch does not meet the reference sheet", {"ratio": [ratio.real, ratio.imag]})

    return lambda x: sign * raw(x)


def continue_branch(curve: HyperellipticCurve, points: Sequence[complex], y0: complex) -> np.ndarray:
    """Step-wise continuation of y along `points` starting from y0 at points[0]."""
    points = np.asarray(points, dtype=complex)
    roots = np.sqrt(curve.f(points).astype(complex))
    out = np.empty(len(points), dtype=complex)
    prev = complex(y0)
    for k, r in enumerate(roots):
        prev = r if abs(r - prev) <= abs(r + prev) else -r
        out[k] = prev
    return out


def loop_points(loop: Loop, count: int = TRACK_STEPS) -> np.ndarray:
    theta = 2.0 * np.pi * np.arange(count + 1) / count
    return loop.center + loop.radius * np.exp(1j * theta)


def check_branch(curve: HyperellipticCurve, loop: Loop, branch) -> float:
    pts = loop_points(loop)
    analytic = branch(pts)
    tracked = continue_branch(curve, pts, analytic[0])
    mismatch = float(np.max(np.abs(analytic - tracked)) / np.max(np.abs(analytic)))
    if mismatch > BRANCH_TOL:
        raise BranchTrackingFailure("analytic branch disagrees with continuation", {"mismatch": mismatch})
    return mismatch


def loop_period(curve: HyperellipticCurve, lo: int, hi: int, power: int, tol: float = None) -> complex:
    """int of x^power dx / y around the loop enclosing e_lo .. e_hi."""
    tol = settings.TOL_EXACT if tol is None else tol
    loop = loop_around(curve, lo, hi)
    branch = loop_branch(curve, loop)
    check_branch(curve, loop, branch)
    path = circle_path(loop.center, loop.radius, upper=False)
    return integrate(lambda x: x ** power / branch(x), path, tol)


def period_matrix(curve: HyperellipticCurve, tol: float = None, threads: int = None) -> np.ndarray:
    """Pi[j, k] = int over cycle k of x^j dx / y, cycles ordered a1, a2, b1, b2."""
    cycles = curve.cycles()
    jobs = [(j, cycles[name]) for j in range(GENUS) for name in CYCLE_NAMES]
    values = ordered_map(
        lambda job: loop_period(curve, job[1][0], job[1][1], job[0], tol),
        jobs,
        threads,
    )
    P = np.array(values, dtype=complex).reshape(GENUS, len(CYCLE_NAMES))

    outer = [abs(loop_period(curve, 0, len(curve.branch_points) - 1, j, tol)) for j in range(GENUS)]
    scale = float(np.max(np.abs(P)))
    if max(outer) > 1e3 * (tol or settings.TOL_EXACT) * max(1.0, scale):
        raise BranchTrackingFailure("integral around all branch points does not vanish", {"outer": outer})
    return P


def skew_form(P: np.ndarray, j: int, l: int) -> complex:
    g = P.shape[1] // 2
    return complex(np.sum(P[j, :g] * P[l, g:] - P[l, :g] * P[j, g:]))


def riemann_relation_1(P) -> float:
    P = period_matrix(P) if isinstance(P, HyperellipticCurve) else np.asarray(P)
    scale = max(float(np.max(np.abs(P))) ** 2, 1e-300)
    worst = 0.0
    for j in range(P.shape[0]):
        for l in range(P.shape[0]):
            worst = max(worst, abs(skew_form(P, j, l)) / scale)
    return worst


def hermitian_form(P: np.ndarray) -> np.ndarray:
    g = P.shape[1] // 2
    a, b = P[:, :g], P[:, g:]
    cross = a @ b.conj().T
    return 1j * (cross - cross.conj().T)


def riemann_relation_2(P) -> float:
    P = period_matrix(P) if isinstance(P, HyperellipticCurve) else np.asarray(P)
    return float(np.min(np.linalg.eigvalsh(hermitian_form(P))))


def flip_b_cycles(P: np.ndarray) -> np.ndarray:
    g = P.shape[1] // 2
    out = np.array(P, dtype=complex)
    out[:, g:] *= -1.0
    return out


@dataclass(frozen=True)
class ClassicalResult:
    branch_points: Tuple[float, ...]
    period_matrix: np.ndarray
    rel1_residual: float
    rel2_min_eig: float
    orientation_flipped: bool


def classical_relations(curve: HyperellipticCurve, tol: float = None, threads: int = None) -> ClassicalResult:
    P = period_matrix(curve, tol, threads)
    flipped = False
    if riemann_relation_2(P) < 0:
        logger.warning("flipping b-cycle orientation to make the Hermitian form positive")
        P = flip_b_cycles(P)
        flipped = True
    return ClassicalResult(
        branch_points=curve.branch_points,
        period_matrix=P,
        rel1_residual=riemann_relation_1(P),
        rel2_min_eig=riemann_relation_2(P),
        orientation_flipped=flipped,
    )


def hyperelliptic_record(result: ClassicalResult) -> Dict[str, object]:
    return {
        "branch_points": list(result.branch_points),
        "period_matrix": [[[float(z.real), float(z.imag)] for z in row] for row in result.period_matrix],
        "rel1_residual": result.rel1_residual,
        "rel2_min_eig": result.rel2_min_eig,
        "orientation_flipped": result.orientation_flipped,
    }


def random_curve(rng: np.random.Generator, low: float = -3.0, high: float = 3.0, min_gap: float = 0.3) -> HyperellipticCurve:
    while True:
        e = np.sort(rng.uniform(low, high, 2 * GENUS + 2))
        if np.min(np.diff(e)) > min_gap:
            return HyperellipticCurve(tuple(float(x) for x in e))


def symmetric_curve() -> HyperellipticCurve:
    return HyperellipticCurve((-2.5, -1.5, -0.5, 0.5, 1.5, 2.5))


def symplectic_form(g: int = GENUS) -> np.ndarray:
    eye = np.eye(g, dtype=int)
    zero = np.zeros((g, g), dtype=int)
    return np.block([[zero, eye], [-eye, zero]])


def random_symplectic(rng: np.random.Generator, g: int = GENUS, steps: int = 4) -> np.ndarray:
    eye = np.eye(g, dtype=int)
    zero = np.zeros((g, g), dtype=int)
    S = np.eye(2 * g, dtype=int)
    for _ in range(steps):
        A = rng.integers(-2, 3, (g, g))
        A = A + A.T
        B = rng.integers(-2, 3, (g, g))
        B = B + B.T
        S = np.block([[eye, A], [zero, eye]]) @ S
        S = np.block([[eye, zero], [B, eye]]) @ S
    U = eye.copy()
    U[0, 1:] = rng.integers(-2, 3, g - 1)
    U_inv_t = np.round(np.linalg.inv(U).T).astype(int)
    return np.block([[U, zero], [zero, U_inv_t]]) @ S


def symplectic_change(P: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Periods over the cycles S c, c the current basis."""
    return np.asarray(P) @ np.asarray(S).T
