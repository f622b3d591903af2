import numpy as np
import pytest

from pluriperiod.core.config import settings
from pluriperiod.core.errors import RankAmbiguous, UnsupportedGroup
from pluriperiod.numerics import cohomology
from pluriperiod.numerics.cohomology import (
    CocycleSystem,
    coboundary_matrix,
    coboundary_solve,
    h1_dimension,
    h1_record,
    invariants_dimension,
    is_coboundary,
    numerical_rank,
    relator_matrix,
    values_vector,
)
from pluriperiod.numerics.eichler import PeriodCocycle
from pluriperiod.numerics.forms import zero_form
from pluriperiod.numerics.fuchsian import surface_group
from pluriperiod.numerics.polyspace import BoundedPoly, poly_slash


@pytest.mark.parametrize("m, expected", [(-1, 6), (-2, 10), (-3, 14)])
def test_h1_dimension_genus_two(octagon, m, expected):
    G, _ = octagon
    assert h1_dimension(G, m) == expected


def test_h1_dimension_genus_three():
    G, _ = surface_group(3)
    assert h1_dimension(G, -1) == 12


def test_trivial_module(octagon):
    G, _ = octagon
    record = h1_record(G, 0)
    assert record["dimH1"] == 4
    assert record["dimInvariants"] == 1


def test_record_fields(octagon):
    G, _ = octagon
    record = h1_record(G, -1)
    assert set(record) == {"g", "m", "dimM", "dimZ1", "dimB1", "dimH1", "dimInvariants", "sv_gap"}
    assert record["dimM"] == 3
    assert record["dimZ1"] == 9
    assert record["dimB1"] == 3
    assert record["sv_gap"] >= settings.RANK_GAP_MIN
    assert invariants_dimension(G, -1) == 0


def test_coboundaries_are_cocycles(octagon):
    G, _ = octagon
    R = relator_matrix(G, -2)
    delta = coboundary_matrix(G, -2)
    assert np.max(np.abs(R @ delta)) <= 1e-10 * np.max(np.abs(R)) * np.max(np.abs(delta))


def test_coboundary_is_recovered(octagon, rng):
    G, _ = octagon
    D = 2
    P = BoundedPoly.from_coeffs(rng.normal(size=D + 1) + 1j * rng.normal(size=D + 1), D)
    result = coboundary_solve(G, -1, coboundary_matrix(G, -1) @ P.as_array())
    assert result.is_coboundary
    assert result.witness.distance(P) < 1e-6


def test_zero_cocycle_is_a_coboundary(octagon):
    G, _ = octagon
    result = coboundary_solve(G, -1, np.zeros(12))
    assert result.is_coboundary
    assert result.witness.distance(BoundedPoly.zero(2)) < 1e-12


def test_generic_cocycle_is_not_a_coboundary(octagon, rng):
    G, _ = octagon
    kernel = CocycleSystem.build(G, -1).cocycle_space()
    assert kernel.shape == (12, 9)
    vector = kernel @ (rng.normal(size=9) + 1j * rng.normal(size=9))
    result = coboundary_solve(G, -1, vector)
    assert not result.is_coboundary
    assert result.witness is None


def test_rank_of_zero_matrix():
    assert numerical_rank(np.zeros((3, 4))).rank == 0


def test_rank_gap_threshold(octagon, monkeypatch):
    G, _ = octagon
    monkeypatch.setattr(settings, "RANK_GAP_MIN", 1e30)
    with pytest.raises(RankAmbiguous):
        h1_record(G, -1)


def test_cyclic_group_is_rejected(cyclic):
    with pytest.raises(UnsupportedGroup):
        relator_matrix(cyclic, -1)
    with pytest.raises(UnsupportedGroup):
        cohomology.coboundary_matrix(cyclic, -1)


def test_cocycle_built_from_a_polynomial_is_a_coboundary(octagon):
    G, O = octagon
    P = BoundedPoly.from_coeffs([1.0, -0.5j, 0.25], 2)
    table = {name: poly_slash(P, A, 2) - P for name, A in G.generators.items()}
    C = PeriodCocycle(zero_form(-1), -1, G, O.base_point, table=table)
    assert cohomology.relator_residual(C) < 1e-10
    result = is_coboundary(C)
    assert result.is_coboundary
    assert result.witness.distance(P) < 1e-6


def test_values_vector_follows_generator_order(octagon):
    G, O = octagon
    table = {name: BoundedPoly.from_coeffs([k, 0, 1j * k], 2) for k, name in enumerate(G.generators)}
    vector = values_vector(G, table)
    assert vector.shape == (12,)
    assert vector[3] == 1 and vector[5] == 1j
    C = PeriodCocycle(zero_form(-1), -1, G, O.base_point, table=table)
    assert np.array_equal(cohomology.cocycle_vector(C), vector)
