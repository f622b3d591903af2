"""
H^1(Gamma, M) for a one-relator surface group, M = polynomials of degree <= D
under the right action P -> P|A.

A cocycle is fixed by its generator values (X_x)_x in M^{2g}. It is admissible
iff the relator expands to zero, where Omega_{y1..yn} = sum_j Omega_{y_j}|(y_{j+1}..y_n)
and an inverse letter contributes Omega_{y^-1} = -X_y|y^-1.
"""
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
from scipy import linalg

from pluriperiod.core.config import settings
from pluriperiod.core.errors import RankAmbiguous, UnsupportedGroup
from pluriperiod.core.logging import get_logger
from pluriperiod.numerics.eichler import PeriodCocycle, kernel_degree
from pluriperiod.numerics.fuchsian import Group, GroupWord, SurfaceGroup
from pluriperiod.numerics.polyspace import BoundedPoly, slash_matrix

logger = get_logger(__name__)


@dataclass(frozen=True)
class Rank:
    rank: int
    gap: float
    singular_values: Tuple[float, ...]


def numerical_rank(mat: np.ndarray) -> Rank:
    s = linalg.svd(np.asarray(mat, dtype=complex), compute_uv=False)
    if len(s) == 0 or s[0] == 0.0:
        return Rank(0, float("inf"), tuple(float(x) for x in s))
    cut = settings.RANK_REL_THRESHOLD * s[0]
    rank = int(np.sum(s > cut))
    floor = s[0] * max(mat.shape) * np.finfo(float).eps
    discarded = s[rank] if rank < len(s) else 0.0
    gap = float(s[rank - 1] / max(discarded, floor))
    logger.debug("singular values %s -> rank %d gap %.3g", np.array2string(s, precision=3), rank, gap)
    if gap < settings.RANK_GAP_MIN:
        raise RankAmbiguous(
            "singular value gap too small", {"rank": rank, "gap": gap, "shape": list(mat.shape)}
        )
    return Rank(rank, gap, tuple(float(x) for x in s))


def _require_surface(G: Group) -> SurfaceGroup:
    if not isinstance(G, SurfaceGroup):
        raise UnsupportedGroup("cohomology needs a surface group presentation", {"group": type(G).__name__})
    return G


def generator_order(G: SurfaceGroup) -> List[str]:
    return list(G.generators)


def relator_matrix(G: Group, m: int) -> np.ndarray:
    G = _require_surface(G)
    D = kernel_degree(m)
    size = D + 1
    order = generator_order(G)
    block = {name: k for k, name in enumerate(order)}
    out = np.zeros((size, size * len(order)), dtype=complex)

    letters = G.relator.letters
    for j, (name, exp) in enumerate(letters):
        suffix = GroupWord(letters[j + 1:])
        if exp == 1:
            contribution = slash_matrix(G.word_to_matrix(suffix), D)
        else:
            carried = GroupWord.reduced(((name, -1),) + suffix.letters)
            contribution = -slash_matrix(G.word_to_matrix(carried), D)
        k = block[name]
        out[:, k * size:(k + 1) * size] += contribution
    return out


def coboundary_matrix(G: Group, m: int) -> np.ndarray:
    G = _require_surface(G)
    D = kernel_degree(m)
    eye = np.eye(D + 1)
    return np.vstack([slash_matrix(G.generators[name], D) - eye for name in generator_order(G)])


@dataclass(frozen=True)
class CocycleSystem:
    group: SurfaceGroup
    m: int
    relator: np.ndarray
    coboundary: np.ndarray

    @classmethod
    def build(cls, G: Group, m: int) -> "CocycleSystem":
        G = _require_surface(G)
        return cls(G, m, relator_matrix(G, m), coboundary_matrix(G, m))

    @property
    def module_dimension(self) -> int:
        return -2 * self.m + 1

    def ranks(self) -> Tuple[Rank, Rank]:
        return numerical_rank(self.relator), numerical_rank(self.coboundary)

    def cocycle_space(self) -> np.ndarray:
        return linalg.null_space(self.relator, rcond=settings.RANK_REL_THRESHOLD)


def h1_record(G: Group, m: int) -> Dict[str, object]:
    system = CocycleSystem.build(G, m)
    rel, cob = system.ranks()
    unknowns = system.relator.shape[1]
    dim_z1 = unknowns - rel.rank
    dim_b1 = cob.rank
    record = {
        "g": system.group.genus,
        "m": m,
        "dimM": system.module_dimension,
        "dimZ1": dim_z1,
        "dimB1": dim_b1,
        "dimH1": dim_z1 - dim_b1,
        "dimInvariants": system.module_dimension - cob.rank,
        "sv_gap": min(rel.gap, cob.gap),
    }
    logger.info("H1 record g=%d m=%d: dim %d (gap %.2e)", record["g"], m, record["dimH1"], record["sv_gap"])
    return record


def h1_dimension(G: Group, m: int) -> int:
    return int(h1_record(G, m)["dimH1"])


def invariants_dimension(G: Group, m: int) -> int:
    return int(h1_record(G, m)["dimInvariants"])


def cocycle_vector(C: PeriodCocycle) -> np.ndarray:
    G = _require_surface(C.group)
    return values_vector(G, {name: C.generator(name) for name in generator_order(G)})


def values_vector(G: SurfaceGroup, values: Mapping[str, BoundedPoly]) -> np.ndarray:
    return np.concatenate([values[name].as_array() for name in generator_order(G)])


@dataclass(frozen=True)
class CoboundaryResult:
    is_coboundary: bool
    witness: Optional[BoundedPoly]
    residual: float


def coboundary_solve(G: Group, m: int, vector: np.ndarray) -> CoboundaryResult:
    """Least-squares P with P|x - P = vector_x for every generator x."""
    delta = coboundary_matrix(G, m)
    vector = np.asarray(vector, dtype=complex)
    sol, *_ = np.linalg.lstsq(delta, vector, rcond=None)
    residual = float(np.linalg.norm(delta @ sol - vector))
    scale = max(1.0, float(np.linalg.norm(vector)))
    ok = residual < settings.COBOUNDARY_REL_TOL * scale
    witness = BoundedPoly.from_coeffs(sol, -2 * m)
    return CoboundaryResult(ok, witness if ok else None, residual)


def is_coboundary(C: PeriodCocycle) -> CoboundaryResult:
    return coboundary_solve(C.group, C.m, cocycle_vector(C))


def relator_residual(C: PeriodCocycle) -> float:
    """|R x| / (1 + |x|) for the generator values of C."""
    vec = cocycle_vector(C)
    R = relator_matrix(C.group, C.m)
    return float(np.linalg.norm(R @ vec) / (1.0 + np.linalg.norm(vec)))
