"""
Surface groups of genus g >= 2 realised by the regular hyperbolic 4g-gon,
the cyclic dilation model, reduced words, ball enumeration by hyperbolic
displacement, and the vertex chase of the fundamental polygon.

Side layout of handle i (counter-clockwise, starting at the handle's first
vertex T):

    gamma_i       T                      -> a_i^-1 b_i^-1 a_i T
    gamma_{i+g}   a_i^-1 b_i^-1 a_i T    -> b_i^-1 a_i T
    gamma_i^-1    b_i^-1 a_i T           -> a_i T
    gamma_{i+g}^-1 a_i T                 -> b_i a_i^-1 b_i^-1 a_i T

a_i carries gamma_i onto gamma_i^-1 and b_i carries gamma_{i+g} onto
gamma_{i+g}^-1, both reversing traversal. The relator is c_g ... c_1 with
c_i = b_i a_i^-1 b_i^-1 a_i.
"""
import math
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from pluriperiod.core.config import settings
from pluriperiod.core.errors import (
    BudgetExceeded,
    ConstructionFailure,
    NotReduced,
    UnsupportedGroup,
)
from pluriperiod.core.logging import get_logger
from pluriperiod.numerics.moebius import (
    MoebiusMap,
    cayley_to_half_plane,
    disk_to_half_plane_map,
)

logger = get_logger(__name__)

Letter = Tuple[str, int]
_LETTER_RE = re.compile(r"^([a-z]+\d*)(\^(-?1))?$")


def free_reduce(letters: Sequence[Letter]) -> Tuple[Letter, ...]:
    out: List[Letter] = []
    for name, exp in letters:
        if out and out[-1][0] == name and out[-1][1] == -exp:
            out.pop()
        else:
            out.append((name, exp))
    return tuple(out)


@dataclass(frozen=True)
class GroupWord:
    letters: Tuple[Letter, ...] = ()

    def __post_init__(self):
        letters = tuple((str(n), int(e)) for n, e in self.letters)
        for _, exp in letters:
            if exp not in (1, -1):
                raise ValueError(f"exponent must be +1 or -1, got {exp}")
        if free_reduce(letters) != letters:
            raise NotReduced("word is not freely reduced", {"word": format_letters(letters)})
        object.__setattr__(self, "letters", letters)

    @classmethod
    def reduced(cls, letters: Sequence[Letter]) -> "GroupWord":
        return cls(free_reduce([(str(n), int(e)) for n, e in letters]))

    @classmethod
    def parse(cls, text: str) -> "GroupWord":
        letters = []
        for token in text.split():
            match = _LETTER_RE.match(token)
            if not match:
                raise ValueError(f"cannot parse letter {token!r}")
            letters.append((match.group(1), int(match.group(3) or 1)))
        return cls(tuple(letters))

    def __mul__(self, other: "GroupWord") -> "GroupWord":
        return GroupWord.reduced(self.letters + other.letters)

    def inverse(self) -> "GroupWord":
        return GroupWord(tuple((n, -e) for n, e in reversed(self.letters)))

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return format_letters(self.letters) or "1"


def format_letters(letters: Sequence[Letter]) -> str:
    return " ".join(n if e == 1 else f"{n}^-1" for n, e in letters)


def letter(name: str, exp: int = 1) -> GroupWord:
    return GroupWord(((name, exp),))


@dataclass(frozen=True)
class Element:
    word: GroupWord
    matrix: MoebiusMap
    displacement: float


@dataclass(frozen=True)
class Edge:
    label: str
    index: int
    start: complex
    end: complex
    pairing: GroupWord
    partner: int


@dataclass(frozen=True)
class FundamentalOctagon:
    """The fundamental 4g-gon: vertices tau_1 .. tau_{4g+1} and labelled edges."""

    genus: int
    vertices: Tuple[complex, ...]
    edges: Tuple[Edge, ...]

    @property
    def base_point(self) -> complex:
        return self.vertices[0]

    def edge(self, i: int, inverse: bool = False) -> Edge:
        """Edge gamma_i (1 <= i <= 2g), or gamma_i^-1 when `inverse`."""
        handle, offset = handle_offset(i, self.genus)
        return self.edges[4 * (handle - 1) + offset + (2 if inverse else 0)]

    def perimeter(self) -> float:
        return float(sum(abs(e.end - e.start) for e in self.edges))

    def pairing_residual(self, group: "SurfaceGroup") -> float:
        """Pairing elements must carry each edge's endpoints onto its partner's."""
        worst = 0.0
        for e in self.edges:
            partner = self.edges[e.partner]
            A = group.word_to_matrix(e.pairing)
            image = sorted([A(e.start), A(e.end)], key=lambda z: (z.real, z.imag))
            target = sorted([partner.start, partner.end], key=lambda z: (z.real, z.imag))
            worst = max(worst, max(abs(x - y) for x, y in zip(image, target)))
        return worst


def handle_offset(i: int, genus: int) -> Tuple[int, int]:
    if not 1 <= i <= 2 * genus:
        raise ValueError(f"edge index must lie in 1..{2 * genus}, got {i}")
    return (i, 0) if i <= genus else (i - genus, 1)


@dataclass(frozen=True)
class SurfaceGroup:
    genus: int
    generators: Dict[str, MoebiusMap]
    relator: GroupWord
    disk_vertices: Tuple[complex, ...] = ()

    def letter_matrix(self, name: str, exp: int) -> MoebiusMap:
        g = self.generators[name]
        return g if exp == 1 else g.inverse()

    def word_to_matrix(self, w: GroupWord) -> MoebiusMap:
        out = MoebiusMap.identity()
        for name, exp in w.letters:
            out = out.compose(self.letter_matrix(name, exp))
        return out

    def letters(self) -> List[Letter]:
        return [(name, e) for name in self.generators for e in (1, -1)]

    def relator_residual(self) -> float:
        R = self.word_to_matrix(self.relator)
        return R.distance(MoebiusMap.identity())

    def alpha(self, i: int) -> str:
        return f"a{i}"

    def beta(self, i: int) -> str:
        return f"b{i}"

    def pairing_word(self, i: int) -> GroupWord:
        handle, offset = handle_offset(i, self.genus)
        return letter(self.beta(handle) if offset else self.alpha(handle))


@dataclass(frozen=True)
class CyclicGroup:
    """Gamma = <A> with A = diag(lam, 1/lam): the exact oracle backend."""

    lam: float
    generators: Dict[str, MoebiusMap] = field(default_factory=dict)
    genus: Optional[int] = None

    def __post_init__(self):
        if not self.lam > 1.0:
            raise ValueError(f"lambda must exceed 1, got {self.lam}")
        object.__setattr__(self, "generators", {"a": MoebiusMap(self.lam, 0.0, 0.0, 1.0 / self.lam)})

    @property
    def generator(self) -> MoebiusMap:
        return self.generators["a"]

    def power(self, n: int) -> MoebiusMap:
        return MoebiusMap(self.lam ** n, 0.0, 0.0, self.lam ** (-n))

    def word_to_matrix(self, w: GroupWord) -> MoebiusMap:
        return self.power(sum(e for _, e in w.letters))

    def letters(self) -> List[Letter]:
        return [("a", 1), ("a", -1)]

    def pairing_word(self, i: int) -> GroupWord:
        return letter("a")


Group = Union[SurfaceGroup, CyclicGroup]


def cyclic_group(lam: float) -> CyclicGroup:
    return CyclicGroup(lam)


def regular_polygon_circumradius(sides: int, angle: float) -> float:
    def vertex_angle(r: float) -> float:
        return 2.0 * math.atan(1.0 / (math.cosh(r) * math.tan(math.pi / sides)))

    return brentq(lambda r: vertex_angle(r) - angle, 1e-6, 50.0, xtol=1e-14, rtol=1e-15)


def surface_group(genus: int = 2) -> Tuple[SurfaceGroup, FundamentalOctagon]:
    if genus < 2:
        raise ValueError("genus must be at least 2")
    sides = 4 * genus
    angle = 2.0 * math.pi / sides
    circum = regular_polygon_circumradius(sides, angle)
    apothem = math.acosh(math.cos(angle / 2.0) / math.sin(math.pi / sides))
    r = math.tanh(circum / 2.0)

    step = 2.0 * math.pi / sides
    disk_vertices = tuple(r * np.exp(1j * (k * step - step / 2.0)) for k in range(sides))

    def rotation(theta: float) -> np.ndarray:
        return np.array([[np.exp(0.5j * theta), 0.0], [0.0, np.exp(-0.5j * theta)]])

    shift = np.array(
        [[math.cosh(apothem), math.sinh(apothem)], [math.sinh(apothem), math.cosh(apothem)]]
    )

    def pairing(src: int, dst: int) -> MoebiusMap:
        m = rotation(dst * step) @ shift @ rotation(math.pi - src * step)
        return disk_to_half_plane_map(m)

    generators: Dict[str, MoebiusMap] = {}
    relator_letters: List[Letter] = []
    for i in range(1, genus + 1):
        base = 4 * (i - 1)
        generators[f"a{i}"] = pairing(base, base + 2)
        generators[f"b{i}"] = pairing(base + 1, base + 3)
        cycle = [(f"b{i}", 1), (f"a{i}", -1), (f"b{i}", -1), (f"a{i}", 1)]
        relator_letters = cycle + relator_letters

    group = SurfaceGroup(
        genus=genus,
        generators=generators,
        relator=GroupWord(tuple(relator_letters)),
        disk_vertices=disk_vertices,
    )

    residual = group.relator_residual()
    if residual > 1e-9:
        raise ConstructionFailure("relator does not close", {"residual": residual})
    for name, g in generators.items():
        if not g.is_hyperbolic():
            raise ConstructionFailure("generator is not hyperbolic", {"generator": name, "trace": g.trace()})

    octagon = vertex_chase(group, cayley_to_half_plane(disk_vertices[0]))
    geometric = [cayley_to_half_plane(v) for v in disk_vertices] + [cayley_to_half_plane(disk_vertices[0])]
    chase_error = max(abs(x - y) for x, y in zip(octagon.vertices, geometric))
    if chase_error > 1e-9:
        raise ConstructionFailure("vertex chase disagrees with the polygon", {"error": chase_error})

    logger.info("built genus-%d surface group, relator residual %.2e", genus, residual)
    return group, octagon


def octagon_group() -> Tuple[SurfaceGroup, FundamentalOctagon]:
    return surface_group(2)


def word_to_matrix(G: Group, w: GroupWord) -> MoebiusMap:
    return G.word_to_matrix(w)


def commutator_cycle(i: int) -> GroupWord:
    return GroupWord.parse(f"b{i} a{i}^-1 b{i}^-1 a{i}")


def handle_prefix(i: int) -> GroupWord:
    """c_1^-1 ... c_{i-1}^-1, the element whose inverse carries tau_1 to handle i's start."""
    out = GroupWord()
    for j in range(1, i):
        out = out * commutator_cycle(j).inverse()
    return out


def edge_words(i: int) -> Tuple[GroupWord, GroupWord, GroupWord]:
    """Words W with W^-1 tau_1 equal to the start of gamma_i, its end, and the end of gamma_{i+g}."""
    prefix = handle_prefix(i)
    return (
        prefix,
        prefix * GroupWord.parse(f"a{i}^-1 b{i} a{i}"),
        prefix * GroupWord.parse(f"a{i}^-1 b{i}"),
    )


def vertex_chase(G: Group, tau1: complex) -> FundamentalOctagon:
    if not isinstance(G, SurfaceGroup):
        raise UnsupportedGroup("vertex chase needs a surface group", {"group": type(G).__name__})
    if not complex(tau1).imag > 0:
        raise ValueError("base vertex must lie in the upper half-plane")

    g = G.genus
    vertices: List[complex] = [complex(tau1)]
    edges: List[Edge] = []
    T = complex(tau1)
    for i in range(1, g + 1):
        a = G.generators[f"a{i}"]
        b = G.generators[f"b{i}"]
        v3 = a(T)
        v2 = b.inverse()(v3)
        v1 = a.inverse()(v2)
        v4 = b(v1)
        vertices.extend([v1, v2, v3, v4])
        base = 4 * (i - 1)
        chain = [T, v1, v2, v3, v4]
        labels = [f"gamma_{i}", f"gamma_{i + g}", f"gamma_{i}^-1", f"gamma_{i + g}^-1"]
        pairings = [letter(f"a{i}"), letter(f"b{i}"), letter(f"a{i}", -1), letter(f"b{i}", -1)]
        partners = [base + 2, base + 3, base, base + 1]
        for k in range(4):
            edges.append(Edge(labels[k], base + k, chain[k], chain[k + 1], pairings[k], partners[k]))
        T = v4

    return FundamentalOctagon(genus=g, vertices=tuple(vertices), edges=tuple(edges))


def _displacements(mats: np.ndarray) -> np.ndarray:
    a, b, c, d = mats[:, 0, 0], mats[:, 0, 1], mats[:, 1, 0], mats[:, 1, 1]
    z = (a * 1j + b) / (c * 1j + d)
    x = 1.0 + np.abs(z - 1j) ** 2 / (2.0 * z.imag)
    return np.arccosh(np.maximum(x, 1.0))


def _keys(mats: np.ndarray, scale: float) -> List[Tuple[int, int, int, int]]:
    flat = mats.reshape(-1, 4)
    pivot = flat[np.arange(len(flat)), np.argmax(np.abs(flat), axis=1)]
    normed = flat * np.sign(pivot)[:, None]
    return [tuple(row) for row in np.rint(normed / scale).astype(np.int64).tolist()]


def enumerate_ball(
    G: Group,
    R: float,
    cap: Optional[int] = None,
    margin_factor: Optional[float] = None,
) -> List[Element]:
    """Distinct elements A with dist(i, A i) <= R, sorted by displacement then word."""
    if R < 0:
        raise ValueError("radius must be nonnegative")
    cap = cap or settings.ELEMENT_CAP
    if isinstance(G, CyclicGroup):
        return _enumerate_cyclic(G, R, cap)

    margin_factor = settings.ENUMERATION_MARGIN_FACTOR if margin_factor is None else margin_factor
    letters = G.letters()
    letter_mats = np.array([G.letter_matrix(n, e).as_array() for n, e in letters])
    margin = margin_factor * max(g.displacement() for g in G.generators.values())
    prune = R + margin
    scale = settings.ELEMENT_KEY_SCALE

    words: List[Tuple[Letter, ...]] = [()]
    mats = [np.eye(2)]
    seen = set(_keys(np.eye(2)[None], scale))
    frontier_idx = [0]
    explored = 1

    while frontier_idx:
        front = np.array([mats[k] for k in frontier_idx])
        next_idx: List[int] = []
        for li, (name, exp) in enumerate(letters):
            cand = front @ letter_mats[li]
            disp = _displacements(cand)
            keys = _keys(cand, scale)
            for fi, k in enumerate(frontier_idx):
                if disp[fi] > prune:
                    continue
                w = words[k]
                if w and w[-1] == (name, -exp):
                    continue
                key = keys[fi]
                if key in seen:
                    continue
                seen.add(key)
                words.append(w + ((name, exp),))
                mats.append(cand[fi])
                next_idx.append(len(mats) - 1)
        explored += len(next_idx)
        if explored > settings.EXPLORED_NODE_CAP:
            raise BudgetExceeded("explored too many nodes", {"explored": explored, "R": R})
        frontier_idx = next_idx

    all_mats = np.array(mats)
    disp = _displacements(all_mats)
    chosen = [k for k in range(len(mats)) if disp[k] <= R]
    if len(chosen) > cap:
        raise BudgetExceeded("ball exceeds the element cap", {"count": len(chosen), "cap": cap, "R": R})

    elements = [
        Element(GroupWord(words[k]), MoebiusMap.from_array(all_mats[k]), float(disp[k])) for k in chosen
    ]
    elements.sort(key=lambda e: (round(e.displacement, 9), str(e.word)))
    logger.info("enumerated %d elements within R=%.2f (explored %d)", len(elements), R, explored)
    return elements


def _enumerate_cyclic(G: CyclicGroup, R: float, cap: int) -> List[Element]:
    top = int(math.floor(R / (2.0 * math.log(G.lam)) + 1e-12))
    if 2 * top + 1 > cap:
        raise BudgetExceeded("ball exceeds the element cap", {"count": 2 * top + 1, "cap": cap})
    out = []
    for n in range(-top, top + 1):
        word = GroupWord((("a", 1 if n > 0 else -1),) * abs(n))
        out.append(Element(word, G.power(n), 2.0 * abs(n) * math.log(G.lam)))
    out.sort(key=lambda e: (round(e.displacement, 9), str(e.word)))
    return out


def dedup_audit(elements: Sequence[Element], tol: float = 1e-6) -> int:
    coarse: Dict[Tuple[int, ...], List[MoebiusMap]] = {}
    collisions = 0
    for e in elements:
        k = e.matrix.key(scale=1e-4)
        for other in coarse.get(k, []):
            if e.matrix.distance(other) <= tol:
                collisions += 1
        coarse.setdefault(k, []).append(e.matrix)
    if collisions:
        logger.warning("dedup audit found %d near-identical elements", collisions)
    return collisions


def audit_enumeration(G: Group, R: float) -> int:
    """Elements found with a doubled pruning margin but missing from the default run."""
    base = {e.matrix.key() for e in enumerate_ball(G, R)}
    wide = enumerate_ball(G, R, margin_factor=2.0 * settings.ENUMERATION_MARGIN_FACTOR)
    missing = sum(1 for e in wide if e.matrix.key() not in base)
    if missing:
        logger.warning("enumeration audit: %d elements missed at R=%.2f", missing, R)
    return missing


def growth_slope(G: Group, radii: Sequence[float]) -> float:
    counts = [len(enumerate_ball(G, r)) for r in radii]
    slope, _ = np.polyfit(np.asarray(radii, dtype=float), np.log(counts), 1)
    return float(slope)
