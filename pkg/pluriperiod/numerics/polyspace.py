"""Polynomials of degree <= d under the weight action P -> P(A tau)(c tau + d)^d."""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly

from pluriperiod.core.config import settings
from pluriperiod.core.errors import DegreeOverflow, IllConditioned
from pluriperiod.core.logging import get_logger
from pluriperiod.numerics.moebius import MoebiusMap

logger = get_logger(__name__)

Sample = Tuple[complex, complex]


@dataclass(frozen=True)
class BoundedPoly:
    degree_bound: int
    coeffs: Tuple[complex, ...]

    def __post_init__(self):
        if self.degree_bound < 0:
            raise ValueError("degree bound must be nonnegative")
        if len(self.coeffs) != self.degree_bound + 1:
            raise ValueError(
                f"expected {self.degree_bound + 1} coefficients, got {len(self.coeffs)}"
            )

    @classmethod
    def from_coeffs(cls, coeffs: Sequence[complex], degree_bound: Optional[int] = None) -> "BoundedPoly":
        c = [complex(x) for x in coeffs]
        d = len(c) - 1 if degree_bound is None else degree_bound
        if len(c) > d + 1:
            if any(abs(x) > 0.0 for x in c[d + 1:]):
                raise DegreeOverflow("coefficients beyond degree bound", {"degree_bound": d})
            c = c[: d + 1]
        c = c + [0j] * (d + 1 - len(c))
        return cls(d, tuple(c))

    @classmethod
    def zero(cls, d: int) -> "BoundedPoly":
        return cls(d, (0j,) * (d + 1))

    @classmethod
    def monomial(cls, mu: int, d: int) -> "BoundedPoly":
        c = [0j] * (d + 1)
        c[mu] = 1.0 + 0j
        return cls(d, tuple(c))

    def as_array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=complex)

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=complex)
        acc = np.zeros_like(tau)
        for c in reversed(self.coeffs):
            acc = acc * tau + c
        return acc if np.ndim(acc) else complex(acc)

    def __getitem__(self, mu: int) -> complex:
        return self.coeffs[mu]

    def __add__(self, other: "BoundedPoly") -> "BoundedPoly":
        d = max(self.degree_bound, other.degree_bound)
        return BoundedPoly.from_coeffs(
            self.relabel(d).as_array() + other.relabel(d).as_array(), d
        )

    def __neg__(self) -> "BoundedPoly":
        return BoundedPoly(self.degree_bound, tuple(-c for c in self.coeffs))

    def __sub__(self, other: "BoundedPoly") -> "BoundedPoly":
        return self + (-other)

    def scale(self, s: complex) -> "BoundedPoly":
        return BoundedPoly(self.degree_bound, tuple(s * c for c in self.coeffs))

    def relabel(self, d: int) -> "BoundedPoly":
        return BoundedPoly.from_coeffs(self.coeffs, d)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def distance(self, other: "BoundedPoly") -> float:
        """max_mu |delta c_mu| / (1 + |c_mu|), measured against `other`."""
        d = max(self.degree_bound, other.degree_bound)
        mine = self.relabel(d).as_array()
        ref = other.relabel(d).as_array()
        return float(np.max(np.abs(mine - ref) / (1.0 + np.abs(ref))))


@dataclass(frozen=True)
class PolyFit:
    poly: BoundedPoly
    residual: float
    condition: float


def poly_slash(P: BoundedPoly, A: MoebiusMap, d: int) -> BoundedPoly:
    """Exact expansion of sum_mu c_mu (a tau + b)^mu (c tau + delta)^(d - mu)."""
    if P.degree_bound > d:
        raise DegreeOverflow(
            "polynomial exceeds the module degree", {"degree_bound": P.degree_bound, "d": d}
        )
    numer = np.array([A.b, A.a], dtype=complex)
    denom = np.array([A.d, A.c], dtype=complex)
    out = np.zeros(d + 1, dtype=complex)
    for mu, c in enumerate(P.coeffs):
        if c == 0:
            continue
        term = npoly.polymul(npoly.polypow(numer, mu), npoly.polypow(denom, d - mu))
        out[: len(term)] += c * term
    return BoundedPoly(d, tuple(complex(x) for x in out))


def slash_matrix(A: MoebiusMap, d: int) -> np.ndarray:
    cols = [poly_slash(BoundedPoly.monomial(mu, d), A, d).as_array() for mu in range(d + 1)]
    return np.column_stack(cols)


def fit_nodes(count: int, center: complex = None, radius: float = None) -> np.ndarray:
    center = complex(0.0, settings.FIT_CENTER_IM) if center is None else complex(center)
    radius = settings.FIT_RADIUS if radius is None else radius
    theta = 2.0 * np.pi * np.arange(count) / count
    return center + radius * np.exp(1j * theta)


def fit_poly(samples: Sequence[Sample], d: int, holdout: Optional[Sequence[Sample]] = None) -> PolyFit:
    if len(samples) < d + 2:
        raise ValueError(f"need at least {d + 2} samples for degree {d}, got {len(samples)}")
    nodes = np.array([s[0] for s in samples], dtype=complex)
    values = np.array([s[1] for s in samples], dtype=complex)

    vander = npoly.polyvander(nodes, d)
    cond = float(np.linalg.cond(vander))
    if cond > settings.VANDERMONDE_COND_MAX:
        raise IllConditioned("Vandermonde matrix too ill-conditioned", {"condition": cond, "d": d})

    coeffs, *_ = np.linalg.lstsq(vander, values, rcond=None)
    poly = BoundedPoly.from_coeffs(coeffs, d)

    if holdout:
        check_nodes = np.array([s[0] for s in holdout], dtype=complex)
        check_values = np.array([s[1] for s in holdout], dtype=complex)
    else:
        check_nodes, check_values = nodes, values
    residual = float(np.max(np.abs(poly(check_nodes) - check_values))) if len(check_nodes) else 0.0

    logger.debug("fit_poly d=%d cond=%.3g residual=%.3g", d, cond, residual)
    return PolyFit(poly=poly, residual=residual, condition=cond)
