"""
Concrete automorphic forms of weight k = 2 - 2m.

The poincare backend is the disk-model series pulled back to H:

    phi(z) = sum_A w(Az)^nu (Az + i)^-k (cz + d)^-k,    w(z) = (z - i)/(z + i)

truncated to a ball of the surface group. The seed w^nu (z + i)^-k decays at
infinity and the sum converges absolutely for k >= 4. The product
(Az + i)(cz + d) is evaluated as (a + ic) z + (b + id).
"""
import math
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Sequence

import numpy as np

from pluriperiod.core.config import settings
from pluriperiod.core.logging import get_logger
from pluriperiod.numerics.fuchsian import (
    CyclicGroup,
    Group,
    SurfaceGroup,
    cyclic_group,
    enumerate_ball,
)
from pluriperiod.numerics.moebius import MoebiusMap, cayley_to_half_plane, slash
from pluriperiod.utils.parallel import ordered_map

logger = get_logger(__name__)

Evaluator = Callable[[np.ndarray], np.ndarray]
CACHE_SIZE = 512


@dataclass
class FormHandle:
    m: int
    backend: str
    evaluator: Evaluator
    group: Optional[Group] = None
    defect_estimate: float = 0.0
    weight: Optional[int] = None
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.weight is None:
            self.weight = 2 - 2 * self.m
        if self.backend in ("poincare", "cyclic"):
            if self.weight % 2 or self.weight < 4:
                raise ValueError(f"{self.backend} forms need even weight >= 4, got {self.weight}")
        if not math.isfinite(self.defect_estimate):
            raise ValueError("defect estimate must be finite")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.broadcast_to(np.asarray(self.evaluator(z), dtype=complex), z.shape)
        return out if np.ndim(out) else complex(out)


def _seed(z: np.ndarray) -> np.ndarray:
    return (z - 1j) / (z + 1j)


class _OrbitSum:

    def __init__(self, mats: np.ndarray, nu: int, weight: int, threads: Optional[int] = None):
        a, b = mats[:, 0, 0], mats[:, 0, 1]
        c, d = mats[:, 1, 0], mats[:, 1, 1]
        self.a, self.b, self.c, self.d = a, b, c, d
        self.lead = a + 1j * c
        self.shift = b + 1j * d
        self.nu = nu
        self.weight = weight
        self.threads = threads
        self.cache: Dict[bytes, np.ndarray] = {}
        self.lock = threading.Lock()

    def _chunk(self, sl: slice, flat: np.ndarray) -> np.ndarray:
        u = self.lead[sl, None] * flat[None, :] + self.shift[sl, None]
        terms = u ** (-self.weight)
        if self.nu:
            j = self.c[sl, None] * flat[None, :] + self.d[sl, None]
            az = (self.a[sl, None] * flat[None, :] + self.b[sl, None]) / j
            terms = terms * _seed(az) ** self.nu
        return np.sum(terms, axis=0)

    def __call__(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        key = z.tobytes() + repr(z.shape).encode()
        with self.lock:
            hit = self.cache.get(key)
        if hit is not None:
            return hit

        flat = z.reshape(-1)
        chunk = settings.EVAL_CHUNK
        slices = [slice(lo, lo + chunk) for lo in range(0, len(self.a), chunk)]
        # partial sums are added in chunk order whatever the worker count
        total = np.zeros(flat.shape, dtype=complex)
        for part in ordered_map(lambda sl: self._chunk(sl, flat), slices, self.threads):
            total = total + part
        out = total.reshape(z.shape)

        with self.lock:
            if len(self.cache) >= CACHE_SIZE:
                self.cache.clear()
            self.cache[key] = out
        return out


def defect_panel(G: SurfaceGroup) -> np.ndarray:
    """Fixed points of the fundamental polygon: i and points towards each vertex, out to the boundary."""
    if not G.disk_vertices:
        return np.array([1j])
    inner = [s * v for s in (0.5, 0.95) for v in G.disk_vertices]
    return np.concatenate([[1j], cayley_to_half_plane(np.array(inner))])


def generator_defect(f: FormHandle, G: SurfaceGroup) -> float:
    panel = defect_panel(G)
    return max(automorphy_defect(f, A, panel) for A in G.generators.values())


def poincare_form(
    G: SurfaceGroup, m: int, nu: int = 0, R: float = None, threads: Optional[int] = None
) -> FormHandle:
    R = settings.DEFAULT_RADIUS if R is None else R
    weight = 2 - 2 * m
    if weight < 4:
        raise ValueError(f"Poincare series needs weight >= 4, got m={m}")
    if nu < 0:
        raise ValueError("seed exponent must be nonnegative")

    elements = enumerate_ball(G, R)
    mats = np.array([e.matrix.as_array() for e in elements])
    handle = FormHandle(
        m=m,
        backend="poincare",
        evaluator=_OrbitSum(mats, nu, weight, threads),
        group=G,
        params={"R": R, "nu": nu, "elements": len(elements)},
    )

    handle.defect_estimate = settings.DEFECT_SAFETY * generator_defect(handle, G)
    handle.params["tail_model"] = math.exp(-(weight / 2.0 - 1.0) * R)
    logger.info(
        "poincare form m=%d nu=%d R=%.1f: %d elements, defect %.2e",
        m, nu, R, len(elements), handle.defect_estimate,
    )
    return handle


def cyclic_form(lam: float, m: int) -> FormHandle:
    weight = 2 - 2 * m
    half = weight // 2

    def evaluator(z):
        return z ** (-half)

    return FormHandle(
        m=m, backend="cyclic", evaluator=evaluator, group=cyclic_group(lam), params={"lam": lam}
    )


def power_form(lam: float, s: int) -> FormHandle:
    """z^s on the dilation group; automorphic of weight -2s (a section with m = 1 + s)."""

    def evaluator(z):
        return z ** s

    return FormHandle(
        m=1 + s,
        backend="testfn",
        evaluator=evaluator,
        group=cyclic_group(lam),
        weight=-2 * s,
        params={"lam": lam, "s": s},
    )


def test_function(fn: Evaluator, m: int, group: Optional[Group] = None, weight: Optional[int] = None) -> FormHandle:
    return FormHandle(m=m, backend="testfn", evaluator=fn, group=group, weight=weight)


test_function.__test__ = False


def zero_form(m: int, group: Optional[Group] = None) -> FormHandle:
    return test_function(lambda z: np.zeros_like(z), m, group)


def symmetrize(h: Evaluator, A: MoebiusMap, order: int, weight: int) -> Evaluator:
    """sum_j h|A^j, exactly invariant under the weight-`weight` slash by A when A^order = +-1."""
    if weight % 2:
        raise ValueError("symmetrisation needs an even weight")
    powers = [MoebiusMap.identity()]
    for _ in range(order - 1):
        powers.append(powers[-1].compose(A))
    closing = powers[-1].compose(A)
    if closing.distance(MoebiusMap.identity()) > 1e-12:
        raise ValueError(f"A does not have order {order}")
    terms = [slash(h, P, weight) for P in powers]

    def symmetric(z):
        z = np.asarray(z, dtype=complex)
        total = np.zeros_like(z)
        for term in terms:
            total = total + term(z)
        return total

    return symmetric


def automorphy_defect(f: FormHandle, A: MoebiusMap, z) -> float:
    """max over z of |f(Az) - f(z) (cz+d)^k| / (1 + |f(z)|)."""
    z = np.asarray(z, dtype=complex)
    fz = np.asarray(f(z))
    lhs = np.asarray(f(A(z)))
    rhs = fz * A.automorphy_factor(z) ** f.weight
    return float(np.max(np.abs(lhs - rhs) / (1.0 + np.abs(fz))))


def gram_condition(forms: Sequence[FormHandle], points) -> float:
    points = np.asarray(points, dtype=complex)
    samples = np.array([np.asarray(f(points)).reshape(-1) for f in forms])
    gram = samples @ samples.conj().T
    return float(np.linalg.cond(gram))


def random_panel(rng: np.random.Generator, count: int, G: Group = None) -> np.ndarray:
    if isinstance(G, CyclicGroup) or G is None:
        lam = G.lam if G is not None else 2.0
        radius = rng.uniform(1.0, lam ** 2, count)
        angle = rng.uniform(0.2, math.pi - 0.2, count)
        return radius * np.exp(1j * angle)
    r = 0.8 * abs(G.disk_vertices[0]) * np.sqrt(rng.uniform(0.0, 1.0, count))
    theta = rng.uniform(0.0, 2.0 * math.pi, count)
    return cayley_to_half_plane(r * np.exp(1j * theta))
