import math

import pytest

from pluriperiod.core.errors import BudgetExceeded, NotReduced, UnsupportedGroup
from pluriperiod.numerics.fuchsian import (
    GroupWord,
    audit_enumeration,
    commutator_cycle,
    dedup_audit,
    edge_words,
    enumerate_ball,
    growth_slope,
    handle_prefix,
    letter,
    octagon_group,
    regular_polygon_circumradius,
    surface_group,
    vertex_chase,
    word_to_matrix,
)
from pluriperiod.numerics.moebius import MoebiusMap


def test_word_parse_and_format():
    w = GroupWord.parse("a1 b1^-1 a2")
    assert w.letters == (("a1", 1), ("b1", -1), ("a2", 1))
    assert str(w) == "a1 b1^-1 a2"
    assert str(GroupWord()) == "1"


def test_word_must_be_reduced():
    with pytest.raises(NotReduced):
        GroupWord((("a1", 1), ("a1", -1)))
    assert len(GroupWord.reduced([("a1", 1), ("b1", 1), ("b1", -1)])) == 1


def test_word_product_cancels():
    w = GroupWord.parse("a1 b2 a2^-1")
    assert len(w * w.inverse()) == 0
    assert str(w * letter("a2")) == "a1 b2"


def test_octagon_relator_closes(octagon):
    G, _ = octagon
    assert G.relator_residual() < 1e-9
    assert len(G.relator) == 8
    assert all(g.is_hyperbolic() for g in G.generators.values())
    assert len(G.letters()) == 8


def test_word_to_matrix_composes(octagon):
    G, _ = octagon
    u, v = GroupWord.parse("a1 b1"), GroupWord.parse("a2^-1")
    assert word_to_matrix(G, GroupWord()).distance(MoebiusMap.identity()) == 0.0
    assert word_to_matrix(G, u * v).distance(G.word_to_matrix(u).compose(G.word_to_matrix(v))) < 1e-12


def test_octagon_vertices_and_pairings(octagon):
    G, O = octagon
    assert len(O.vertices) == 9
    assert len(O.edges) == 8
    assert all(complex(v).imag > 0 for v in O.vertices)
    assert abs(O.vertices[-1] - O.vertices[0]) < 1e-9
    assert O.pairing_residual(G) < 1e-9


def test_vertex_chase_relations(octagon):
    G, O = octagon
    a, b = G.generators["a1"], G.generators["b1"]
    t1, t2, t3, t4, t5 = O.vertices[:5]
    assert abs(a(t1) - t4) < 1e-9
    assert abs(b.inverse()(t4) - t3) < 1e-9
    assert abs(a.inverse()(t3) - t2) < 1e-9
    assert abs(b(t2) - t5) < 1e-9


def test_vertex_chase_is_base_point_dependent(octagon):
    G, O = octagon
    moved = vertex_chase(G, O.base_point + 0.01j)
    assert moved.vertices[0] != O.vertices[0]
    assert abs(moved.vertices[-1] - moved.vertices[0]) < 1e-9


def test_edge_words_locate_edges(octagon):
    G, O = octagon
    tau1 = O.base_point
    for i in range(1, G.genus + 1):
        start, middle, last = edge_words(i)
        first = O.edge(i)
        second = O.edge(i + G.genus)
        assert abs(G.word_to_matrix(start).inverse()(tau1) - first.start) < 1e-9
        assert abs(G.word_to_matrix(middle).inverse()(tau1) - first.end) < 1e-9
        assert abs(G.word_to_matrix(last).inverse()(tau1) - second.end) < 1e-9


def test_handle_prefix():
    assert len(handle_prefix(1)) == 0
    assert handle_prefix(2) == commutator_cycle(1).inverse()


def test_genus_three_group():
    G, O = surface_group(3)
    assert G.relator_residual() < 1e-9
    assert len(O.edges) == 12
    assert O.pairing_residual(G) < 1e-9


def test_circumradius_of_regular_octagon():
    r = regular_polygon_circumradius(8, math.pi / 4)
    assert math.cosh(r) == pytest.approx(3 + 2 * math.sqrt(2), rel=1e-10)


def test_cyclic_group(cyclic):
    assert cyclic.generator(1j) == pytest.approx(4j)
    assert cyclic.power(-2)(1j) == pytest.approx(1j / 16)
    assert cyclic.word_to_matrix(GroupWord.parse("a a")).distance(cyclic.power(2)) < 1e-15
    with pytest.raises(UnsupportedGroup):
        vertex_chase(cyclic, 1j)


def test_ball_of_radius_zero(octagon):
    G, _ = octagon
    elements = enumerate_ball(G, 0.0)
    assert len(elements) == 1
    assert len(elements[0].word) == 0


def test_first_shell_is_the_generators(octagon):
    G, _ = octagon
    step = G.generators["a1"].displacement()
    elements = enumerate_ball(G, step + 1e-6)
    assert len(elements) == 9
    assert sorted(len(e.word) for e in elements) == [0] + [1] * 8
    assert all(e.displacement == pytest.approx(step) for e in elements[1:])


def test_ball_is_sorted_and_monotone(octagon):
    G, _ = octagon
    small = enumerate_ball(G, 3.0)
    large = enumerate_ball(G, 4.0)
    assert [e.displacement for e in large] == sorted(e.displacement for e in large)
    assert {e.matrix.key() for e in small} <= {e.matrix.key() for e in large}
    assert all(e.displacement <= 4.0 for e in large)


def test_ball_is_deterministic(octagon):
    G, _ = octagon
    first = [str(e.word) for e in enumerate_ball(G, 4.0)]
    second = [str(e.word) for e in enumerate_ball(G, 4.0)]
    assert first == second


def test_ball_has_no_duplicates(octagon):
    G, _ = octagon
    assert dedup_audit(enumerate_ball(G, 4.5)) == 0


def test_ball_respects_cap(octagon):
    G, _ = octagon
    with pytest.raises(BudgetExceeded):
        enumerate_ball(G, 4.0, cap=5)


def test_cyclic_ball(cyclic):
    elements = enumerate_ball(cyclic, 2 * 2 * math.log(2.0) + 1e-9)
    assert len(elements) == 5
    assert elements[0].displacement == 0.0


@pytest.mark.slow
def test_pruning_margin_is_sufficient(octagon):
    G, _ = octagon
    assert audit_enumeration(G, 5.0) == 0


@pytest.mark.slow
def test_growth_is_exponential_with_unit_rate(octagon):
    G, _ = octagon
    slope = growth_slope(G, [5.0, 6.0, 7.0, 8.0])
    assert 0.8 < slope < 1.2


def test_octagon_group_is_genus_two():
    G, O = octagon_group()
    assert G.genus == 2
    assert list(G.generators) == ["a1", "b1", "a2", "b2"]
    assert O.base_point == O.vertices[0]
