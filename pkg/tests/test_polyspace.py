import numpy as np
import pytest

from pluriperiod.core.errors import DegreeOverflow, IllConditioned
from pluriperiod.numerics.moebius import MoebiusMap
from pluriperiod.numerics.polyspace import BoundedPoly, fit_nodes, fit_poly, poly_slash, slash_matrix

A = MoebiusMap(2.0, 1.0, 1.0, 1.0)
B = MoebiusMap(1.0, -0.5, 0.3, 0.85)
TAUS = np.array([1j, 0.4 + 0.7j, -2 + 3j])


def _poly(d: int) -> BoundedPoly:
    return BoundedPoly.from_coeffs([1 + 0.5j * k - 0.2 * k ** 2 for k in range(d + 1)], d)


def test_poly_slash_identity():
    P = _poly(4)
    assert poly_slash(P, MoebiusMap.identity(), 4).distance(P) < 1e-15


def test_poly_slash_matches_pointwise_definition():
    d = 4
    P = _poly(d)
    got = poly_slash(P, A, d)(TAUS)
    want = P(A(TAUS)) * A.automorphy_factor(TAUS) ** d
    assert np.allclose(got, want, rtol=1e-12)


def test_poly_slash_is_a_right_action():
    d = 3
    P = _poly(d)
    twice = poly_slash(poly_slash(P, A, d), B, d)
    once = poly_slash(P, A.compose(B), d)
    assert twice.distance(once) < 1e-12


def test_poly_slash_rejects_high_degree():
    with pytest.raises(DegreeOverflow):
        poly_slash(_poly(3), A, 2)


def test_from_coeffs_truncates_only_zeros():
    P = BoundedPoly.from_coeffs([1, 2, 0, 0], 1)
    assert P.coeffs == (1, 2)
    with pytest.raises(DegreeOverflow):
        BoundedPoly.from_coeffs([1, 2, 3], 1)


def test_slash_matrix_acts_on_coefficients():
    d = 4
    P = _poly(d)
    assert np.allclose(slash_matrix(A, d) @ P.as_array(), poly_slash(P, A, d).as_array())


def test_arithmetic():
    P, Q = _poly(2), _poly(3)
    total = P + Q
    assert total.degree_bound == 3
    assert (total - Q).distance(P.relabel(3)) < 1e-15
    assert (P - P).is_zero()
    assert P.scale(2.0)[1] == 2 * P[1]


def test_fit_recovers_polynomial():
    d = 5
    P = _poly(d)
    nodes = fit_nodes(2 * (d + 3))
    samples = list(zip(nodes[0::2], P(nodes[0::2])))
    holdout = list(zip(nodes[1::2], P(nodes[1::2])))
    result = fit_poly(samples, d, holdout=holdout)
    assert result.poly.distance(P) < 1e-10
    assert result.residual < 1e-10


def test_fit_needs_enough_samples():
    nodes = fit_nodes(3)
    with pytest.raises(ValueError):
        fit_poly(list(zip(nodes, nodes)), 2)


def test_fit_rejects_clustered_nodes():
    nodes = 2j + 1e-4 * np.arange(12)
    with pytest.raises(IllConditioned):
        fit_poly(list(zip(nodes, nodes)), 8)
