import numpy as np
import pytest

from pluriperiod.core.config import settings
from pluriperiod.numerics.forms import (
    automorphy_defect,
    cyclic_form,
    defect_panel,
    generator_defect,
    gram_condition,
    poincare_form,
    power_form,
    random_panel,
    symmetrize,
    test_function,
    zero_form,
)
from pluriperiod.numerics.moebius import MoebiusMap, slash

INVOLUTION = MoebiusMap(0.0, -1.0, 1.0, 0.0)


def test_cyclic_form_values(cyclic):
    f = cyclic_form(2.0, -1)
    assert f.weight == 4
    assert f(1j) == pytest.approx(-1.0)
    assert f(4j) == pytest.approx(-1.0 / 16)


def test_cyclic_form_is_automorphic(cyclic, rng):
    f = cyclic_form(2.0, -2)
    points = random_panel(rng, 1000, cyclic)
    assert automorphy_defect(f, cyclic.generator, points) < 1e-13


def test_power_form_is_automorphic(cyclic, rng):
    f = power_form(2.0, 1)
    assert f.weight == -2
    assert automorphy_defect(f, cyclic.generator, random_panel(rng, 100, cyclic)) < 1e-13


def test_test_function_is_not_automorphic(cyclic, rng):
    f = test_function(lambda z: z ** 3 + 1, -1)
    assert automorphy_defect(f, cyclic.generator, random_panel(rng, 100, cyclic)) > 0.1


def test_weight_validation(octagon):
    G, _ = octagon
    with pytest.raises(ValueError):
        poincare_form(G, 0)
    with pytest.raises(ValueError):
        poincare_form(G, -1, nu=-1)
    with pytest.raises(ValueError):
        cyclic_form(2.0, 0)


def test_form_broadcasts_scalars():
    f = zero_form(-1)
    assert f(1j) == 0
    assert f(np.array([1j, 2j])).shape == (2,)


def test_truncated_series_of_radius_zero(octagon):
    G, _ = octagon
    f = poincare_form(G, -1, nu=0, R=0.0)
    assert f.params["elements"] == 1
    z = np.array([1j, 0.5 + 2j, 40.0 + 1j])
    assert np.allclose(f(z), (z + 1j) ** -4)


def test_series_evaluation_is_deterministic(series_forms, octagon):
    G, _ = octagon
    f = series_forms(-1, 0)
    points = random_panel(np.random.default_rng(5), 50, G)
    assert np.array_equal(f(points), f(points.copy()))


def test_defect_estimate_bounds_the_panel(series_forms, octagon):
    G, _ = octagon
    f = series_forms(-1, 0)
    assert 0.0 < f.defect_estimate < settings.DEFECT_MAX
    measured = max(automorphy_defect(f, A, defect_panel(G)) for A in G.generators.values())
    assert measured <= f.defect_estimate
    assert generator_defect(f, G) == measured


@pytest.mark.slow
@pytest.mark.parametrize("m", [-1, -2])
def test_defect_decreases_with_radius(octagon, m):
    G, _ = octagon
    defects = [generator_defect(poincare_form(G, m, 0, R), G) for R in (4.0, 6.0, 8.0)]
    assert defects[1] < defects[0]
    assert defects[2] < defects[1]
    assert defects[2] < settings.DEFECT_MAX


@pytest.mark.slow
def test_series_values_settle_with_radius(octagon):
    G, _ = octagon
    points = np.array([1j, 0.3 + 1.2j])
    coarse = poincare_form(G, -1, 0, 6.0)(points)
    fine = poincare_form(G, -1, 0, 8.0)(points)
    assert np.max(np.abs(fine - coarse)) < 1e-3 * np.max(np.abs(fine))
    assert abs(fine[0]) > 1e-3


def test_series_is_independent_of_thread_count(octagon):
    G, _ = octagon
    points = random_panel(np.random.default_rng(3), 30, G)
    single = poincare_form(G, -1, 2, 5.0, threads=1)(points)
    pooled = poincare_form(G, -1, 2, 5.0, threads=4)(points)
    assert np.array_equal(single, pooled)


@pytest.mark.slow
def test_seeded_series_are_independent(series_forms, octagon, rng):
    G, _ = octagon
    points = random_panel(rng, 40, G)
    assert gram_condition([series_forms(-1, 0), series_forms(-1, 2)], points) < 1e6


def test_symmetrised_function_is_invariant():
    weight = -2
    f = symmetrize(lambda z: np.exp(1j * z), INVOLUTION, 2, weight)
    points = np.array([1j, 0.3 + 0.8j, -0.4 + 1.7j])
    assert np.allclose(slash(f, INVOLUTION, weight)(points), f(points), rtol=1e-12)


def test_symmetrize_checks_the_order():
    with pytest.raises(ValueError):
        symmetrize(np.exp, MoebiusMap(2.0, 0.0, 0.0, 0.5), 2, -2)
