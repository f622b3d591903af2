import math

import numpy as np
import pytest

from pluriperiod.core.errors import NearPole
from pluriperiod.numerics.moebius import (
    MoebiusMap,
    apply,
    automorphy_factor,
    cayley_to_disk,
    cayley_to_half_plane,
    compose,
    disk_to_half_plane_map,
    hyperbolic_distance,
    inverse,
    slash,
)

DILATION = MoebiusMap(2.0, 0.0, 0.0, 0.5)
SHEAR = MoebiusMap(1.0, 1.0, 0.0, 1.0)
INVOLUTION = MoebiusMap(0.0, -1.0, 1.0, 0.0)
POINTS = np.array([1j, 0.3 + 2j, -1.7 + 0.4j, 5 + 0.1j])


def test_apply_examples():
    assert apply(MoebiusMap.identity(), 2 + 3j) == 2 + 3j
    assert apply(SHEAR, 1j) == pytest.approx(1 + 1j)
    assert automorphy_factor(INVOLUTION, 1j) == pytest.approx(1j)


def test_apply_dilation():
    assert apply(DILATION, 1j) == pytest.approx(4j)
    assert automorphy_factor(DILATION, 1j) == pytest.approx(0.5)


def test_apply_is_vectorised():
    out = DILATION(POINTS)
    assert out.shape == POINTS.shape
    assert np.allclose(out, 4 * POINTS)


def test_matrix_is_normalised_to_determinant_one():
    A = MoebiusMap(2.0, 0.0, 0.0, 2.0)
    assert (A.a, A.b, A.c, A.d) == pytest.approx((1.0, 0.0, 0.0, 1.0))


def test_nonpositive_determinant_rejected():
    with pytest.raises(ValueError):
        MoebiusMap(0.0, 1.0, 1.0, 0.0)


def test_compose_and_inverse():
    A = compose(SHEAR, DILATION)
    assert np.allclose(A(POINTS), SHEAR(DILATION(POINTS)))
    assert compose(A, inverse(A)).distance(MoebiusMap.identity()) < 1e-14


def test_automorphy_factor_near_pole():
    with pytest.raises(NearPole):
        INVOLUTION.automorphy_factor(0.0)


def test_slash_of_invariant_function():
    f = lambda z: z ** -2
    g = slash(f, DILATION, 4)
    assert np.allclose(g(POINTS), f(POINTS))


def test_slash_is_a_right_action():
    f = lambda z: np.exp(1j * z) + z ** 3
    n = 3
    twice = slash(slash(f, SHEAR, n), DILATION, n)
    once = slash(f, SHEAR.compose(DILATION), n)
    assert np.allclose(twice(POINTS), once(POINTS), rtol=1e-12)


def test_classification():
    assert SHEAR.classify() == "parabolic"
    assert INVOLUTION.classify() == "elliptic"
    assert DILATION.classify() == "hyperbolic"
    assert DILATION.is_hyperbolic()


def test_displacement_of_dilation():
    lam = 3.0
    A = MoebiusMap(lam, 0.0, 0.0, 1.0 / lam)
    assert A.displacement() == pytest.approx(2.0 * math.log(lam))
    assert hyperbolic_distance(1j, 4j) == pytest.approx(math.log(4.0))


def test_key_ignores_sign():
    A = SHEAR.compose(DILATION)
    B = MoebiusMap.from_array(-A.as_array())
    assert A.key() == B.key()
    assert A.distance(B) == 0.0


def test_cayley_maps_are_inverse():
    assert cayley_to_disk(1j) == pytest.approx(0.0)
    w = np.array([0.0, 0.3 + 0.2j, -0.5j])
    assert np.allclose(cayley_to_disk(cayley_to_half_plane(w)), w)


def test_disk_rotation_conjugates_to_elliptic_fixing_i():
    theta = 0.7
    rot = np.array([[np.exp(0.5j * theta), 0.0], [0.0, np.exp(-0.5j * theta)]])
    A = disk_to_half_plane_map(rot)
    assert A(1j) == pytest.approx(1j)
    assert A.classify() == "elliptic"
