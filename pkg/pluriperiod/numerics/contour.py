import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from pluriperiod.core.config import settings
from pluriperiod.core.errors import DomainViolation, ToleranceNotMet
from pluriperiod.core.logging import get_logger

logger = get_logger(__name__)

Integrand = Callable[[np.ndarray], np.ndarray]
ROUNDOFF = 64.0 * np.finfo(float).eps
JOIN_TOL = 1e-12


@lru_cache(maxsize=8)
def _rule(n: int) -> Tuple[np.ndarray, np.ndarray]:
    return leggauss(n)


@dataclass(frozen=True)
class Chord:
    start: complex
    end: complex

    def point(self, t: np.ndarray) -> np.ndarray:
        return self.start + (self.end - self.start) * t

    def derivative(self, t: np.ndarray) -> np.ndarray:
        return np.full_like(np.asarray(t, dtype=complex), self.end - self.start)

    @property
    def length(self) -> float:
        return abs(self.end - self.start)

    def reverse(self) -> "Chord":
        return Chord(self.end, self.start)


@dataclass(frozen=True)
class Arc:
    """center + radius * exp(i theta), theta running from theta0 to theta1."""

    center: complex
    radius: float
    theta0: float
    theta1: float

    def point(self, t: np.ndarray) -> np.ndarray:
        theta = self.theta0 + (self.theta1 - self.theta0) * np.asarray(t)
        return self.center + self.radius * np.exp(1j * theta)

    def derivative(self, t: np.ndarray) -> np.ndarray:
        theta = self.theta0 + (self.theta1 - self.theta0) * np.asarray(t)
        return 1j * self.radius * (self.theta1 - self.theta0) * np.exp(1j * theta)

    @property
    def start(self) -> complex:
        return complex(self.center + self.radius * np.exp(1j * self.theta0))

    @property
    def end(self) -> complex:
        return complex(self.center + self.radius * np.exp(1j * self.theta1))

    @property
    def length(self) -> float:
        return self.radius * abs(self.theta1 - self.theta0)

    def reverse(self) -> "Arc":
        return Arc(self.center, self.radius, self.theta1, self.theta0)


Segment = Union[Chord, Arc]


@dataclass(frozen=True)
class Path:
    segments: Tuple[Segment, ...]

    def __post_init__(self):
        if not self.segments:
            raise ValueError("path needs at least one segment")
        object.__setattr__(self, "segments", tuple(self.segments))
        for left, right in zip(self.segments, self.segments[1:]):
            if abs(left.end - right.start) > JOIN_TOL * (1.0 + abs(left.end)):
                raise ValueError("consecutive segments do not share endpoints")

    @property
    def start(self) -> complex:
        return complex(self.segments[0].start)

    @property
    def end(self) -> complex:
        return complex(self.segments[-1].end)

    @property
    def length(self) -> float:
        return float(sum(s.length for s in self.segments))

    def is_closed(self) -> bool:
        return abs(self.end - self.start) <= JOIN_TOL * (1.0 + abs(self.start))

    def sample(self, per_segment: int = 33) -> np.ndarray:
        t = np.linspace(0.0, 1.0, per_segment)
        return np.concatenate([s.point(t) for s in self.segments])

    def reverse(self) -> "Path":
        return type(self)(tuple(s.reverse() for s in reversed(self.segments)))

    def __add__(self, other: "Path") -> "Path":
        return type(self)(self.segments + other.segments)


@dataclass(frozen=True)
class PathInH(Path):
    def __post_init__(self):
        super().__post_init__()
        lowest = float(np.min(self.sample().imag))
        if lowest <= 0.0:
            raise DomainViolation("path leaves the upper half-plane", {"min_imag": lowest})


def chord_path(start: complex, end: complex) -> PathInH:
    return PathInH((Chord(complex(start), complex(end)),))


def polygon_path(vertices: Sequence[complex], closed: bool = False, upper: bool = True) -> Path:
    pts = [complex(v) for v in vertices]
    if closed:
        pts.append(pts[0])
    cls = PathInH if upper else Path
    return cls(tuple(Chord(a, b) for a, b in zip(pts, pts[1:])))


def circle_path(center: complex, radius: float, clockwise: bool = False, upper: bool = True, pieces: int = 4) -> Path:
    sign = -1.0 if clockwise else 1.0
    step = sign * 2.0 * math.pi / pieces
    arcs = tuple(Arc(complex(center), radius, k * step, (k + 1) * step) for k in range(pieces))
    cls = PathInH if upper else Path
    return cls(arcs)


def reverse(path: Path) -> Path:
    return path.reverse()


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error: float
    panels: int


def _evaluate(f: Integrand, z: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.asarray(f(z), dtype=complex), z.shape)


def _panel(f: Integrand, seg: Segment, t0: float, t1: float, n: int) -> complex:
    x, w = _rule(n)
    half = 0.5 * (t1 - t0)
    t = 0.5 * (t0 + t1) + half * x
    return complex(half * np.sum(w * _evaluate(f, seg.point(t)) * seg.derivative(t)))


def _adaptive(f, seg, t0, t1, tol, depth, max_depth, coarse_n, fine_n, out: List[Tuple[complex, float]]):
    coarse = _panel(f, seg, t0, t1, coarse_n)
    fine = _panel(f, seg, t0, t1, fine_n)
    err = abs(fine - coarse)
    if err <= tol * (t1 - t0) + ROUNDOFF * abs(fine) or not np.isfinite(err):
        out.append((fine, err))
        return
    if depth >= max_depth:
        raise ToleranceNotMet(
            "maximum panel depth reached",
            {"depth": depth, "error": err, "t0": t0, "t1": t1},
        )
    mid = 0.5 * (t0 + t1)
    logger.debug("bisecting panel [%.6g, %.6g] err=%.3g", t0, t1, err)
    _adaptive(f, seg, t0, mid, tol, depth + 1, max_depth, coarse_n, fine_n, out)
    _adaptive(f, seg, mid, t1, tol, depth + 1, max_depth, coarse_n, fine_n, out)


def integrate_detailed(f: Integrand, path: Path, tol: float = None) -> QuadratureResult:
    tol = settings.TOL_EXACT if tol is None else tol
    share = tol / len(path.segments)
    panels: List[Tuple[complex, float]] = []
    for seg in path.segments:
        _adaptive(
            f, seg, 0.0, 1.0, share, 0, settings.QUAD_MAX_DEPTH,
            settings.QUAD_NODES, settings.QUAD_CHECK_NODES, panels,
        )
    value = 0j
    error = 0.0
    for v, e in panels:
        value += v
        error += e
    return QuadratureResult(value=value, error=error, panels=len(panels))


def integrate(f: Integrand, path: Path, tol: float = None) -> complex:
    return integrate_detailed(f, path, tol).value


def cauchy_derivative(f: Integrand, z: complex, n: int, r: float, nodes: int = None) -> complex:
    """n-th derivative at z from the trapezoidal rule on |zeta - z| = r."""
    if n < 0:
        raise ValueError("derivative order must be nonnegative")
    z = complex(z)
    if z.imag - r <= 0.0:
        raise DomainViolation("Cauchy disk leaves the upper half-plane", {"z": [z.real, z.imag], "r": r})
    N = nodes or max(settings.CAUCHY_MIN_NODES, 8 * (n + 1))
    zeta = z + r * np.exp(2j * np.pi * np.arange(N) / N)
    spectrum = np.fft.fft(_evaluate(f, zeta))
    return complex(math.factorial(n) * spectrum[n] / (N * r ** n))
