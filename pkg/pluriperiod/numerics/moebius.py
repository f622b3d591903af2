from dataclasses import dataclass
from typing import Callable, Tuple, Union

import numpy as np

from pluriperiod.core.config import settings
from pluriperiod.core.errors import NearPole

Point = Union[complex, np.ndarray]
Holomorphic = Callable[[np.ndarray], np.ndarray]

POLE_FLOOR = 1e-300
DET_TOL = 1e-12


@dataclass(frozen=True)
class MoebiusMap:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if not np.isfinite(det) or det <= 0.0:
            raise ValueError(f"Moebius matrix must have positive determinant, got {det}")
        if abs(det - 1.0) > DET_TOL:
            s = float(np.sqrt(det))
            object.__setattr__(self, "a", self.a / s)
            object.__setattr__(self, "b", self.b / s)
            object.__setattr__(self, "c", self.c / s)
            object.__setattr__(self, "d", self.d / s)

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_array(cls, m) -> "MoebiusMap":
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def automorphy_factor(self, z: Point) -> Point:
        j = self.c * np.asarray(z, dtype=complex) + self.d
        if np.any(np.abs(j) < POLE_FLOOR):
            raise NearPole("automorphy factor underflow", {"matrix": self.entries()})
        return j if np.ndim(j) else complex(j)

    def __call__(self, z: Point) -> Point:
        z = np.asarray(z, dtype=complex)
        w = (self.a * z + self.b) / self.automorphy_factor(z)
        return w if np.ndim(w) else complex(w)

    def compose(self, other: "MoebiusMap") -> "MoebiusMap":
        return MoebiusMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    __matmul__ = compose

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap(self.d, -self.b, -self.c, self.a)

    def trace(self) -> float:
        return self.a + self.d

    def classify(self) -> str:
        t = abs(self.trace())
        if abs(t - 2.0) < 1e-12:
            return "parabolic"
        return "hyperbolic" if t > 2.0 else "elliptic"

    def is_hyperbolic(self) -> bool:
        return abs(self.trace()) > 2.0

    def displacement(self, base: complex = 1j) -> float:
        return hyperbolic_distance(base, self(base))

    def entries(self) -> Tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    def sign_normalized(self) -> Tuple[float, float, float, float]:
        e = self.entries()
        pivot = max(e, key=abs)
        return tuple(x if pivot > 0 else -x for x in e)

    def key(self, scale: float = None) -> Tuple[int, int, int, int]:
        scale = scale or settings.ELEMENT_KEY_SCALE
        return tuple(int(round(x / scale)) for x in self.sign_normalized())

    def distance(self, other: "MoebiusMap") -> float:
        mine = np.array(self.sign_normalized())
        theirs = np.array(other.sign_normalized())
        return float(np.max(np.abs(mine - theirs)))


def hyperbolic_distance(z: Point, w: Point) -> Point:
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    x = 1.0 + np.abs(z - w) ** 2 / (2.0 * z.imag * w.imag)
    return np.arccosh(x) if np.ndim(x) else float(np.arccosh(x))


def apply(A: MoebiusMap, z: Point) -> Point:
    return A(z)


def automorphy_factor(A: MoebiusMap, z: Point) -> Point:
    return A.automorphy_factor(z)


def compose(A: MoebiusMap, B: MoebiusMap) -> MoebiusMap:
    return A.compose(B)


def inverse(A: MoebiusMap) -> MoebiusMap:
    return A.inverse()


def slash(f: Holomorphic, A: MoebiusMap, n: int) -> Holomorphic:
    """Return z -> f(Az) (cz+d)^(-n), the right action f[A]^{-n}."""

    def slashed(z):
        z = np.asarray(z, dtype=complex)
        return f(A(z)) * A.automorphy_factor(z) ** (-n)

    return slashed


def cayley_to_half_plane(w: Point) -> Point:
    w = np.asarray(w, dtype=complex)
    z = 1j * (1.0 + w) / (1.0 - w)
    return z if np.ndim(z) else complex(z)


def cayley_to_disk(z: Point) -> Point:
    z = np.asarray(z, dtype=complex)
    w = (z - 1j) / (z + 1j)
    return w if np.ndim(w) else complex(w)


def disk_to_half_plane_map(m: np.ndarray) -> MoebiusMap:
    cayley = np.array([[1j, 1j], [-1.0, 1.0]])
    cayley_inv = np.linalg.inv(cayley)
    h = cayley @ np.asarray(m, dtype=complex) @ cayley_inv
    h = h / np.sqrt(np.linalg.det(h))
    if np.max(np.abs(h.imag)) > 1e-9 * max(1.0, np.max(np.abs(h.real))):
        raise ValueError("matrix is not a disk isometry")
    return MoebiusMap.from_array(h.real)
