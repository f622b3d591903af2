import numpy as np
import pytest

from pluriperiod.core.errors import BranchTrackingFailure
from pluriperiod.numerics.hyperelliptic import (
    HyperellipticCurve,
    Loop,
    classical_relations,
    continue_branch,
    flip_b_cycles,
    hermitian_form,
    hyperelliptic_record,
    loop_around,
    loop_branch,
    loop_period,
    loop_points,
    period_matrix,
    random_curve,
    random_symplectic,
    riemann_relation_1,
    riemann_relation_2,
    skew_form,
    symmetric_curve,
    symplectic_change,
    symplectic_form,
)


@pytest.fixture(scope="module")
def default_periods():
    return period_matrix(HyperellipticCurve())


def test_curve_validation():
    with pytest.raises(ValueError):
        HyperellipticCurve((0.0, 1.0, 2.0, 3.0, 4.0))
    with pytest.raises(ValueError):
        HyperellipticCurve((1.0, 0.0, 2.0, 3.0, 4.0, 5.0))
    with pytest.raises(ValueError):
        HyperellipticCurve((0.0, 1.0, 1.0, 3.0, 4.0, 5.0))


def test_polynomial_vanishes_at_branch_points():
    curve = HyperellipticCurve()
    assert np.allclose(curve.f(np.array(curve.branch_points)), 0.0)
    assert curve.f(0.5) == pytest.approx(np.prod([0.5 - e for e in curve.branch_points]))


def test_cycles_are_standard():
    assert HyperellipticCurve().cycles() == {"a1": (0, 1), "a2": (2, 3), "b1": (1, 4), "b2": (3, 4)}


def test_loops_avoid_other_branch_points():
    curve = HyperellipticCurve()
    loop = loop_around(curve, 1, 4)
    e = np.array(curve.branch_points)
    outside = np.concatenate([e[:1], e[5:]])
    assert np.all(np.abs(outside - loop.center) > loop.radius)
    assert np.all(np.abs(e[1:5] - loop.center) < loop.radius)


def test_odd_loop_is_rejected():
    with pytest.raises(BranchTrackingFailure):
        loop_branch(HyperellipticCurve(), Loop(0, 0, 0.0, 0.5))


def test_analytic_branch_matches_continuation():
    curve = HyperellipticCurve()
    loop = loop_around(curve, 0, 1)
    branch = loop_branch(curve, loop)
    points = loop_points(loop)
    tracked = continue_branch(curve, points, branch(points[0]))
    assert np.allclose(tracked, branch(points))
    assert abs(tracked[-1] - tracked[0]) < 1e-12


def test_branch_flips_around_single_point():
    curve = HyperellipticCurve()
    theta = 2 * np.pi * np.arange(513) / 512
    points = 0.3 * np.exp(1j * theta)
    y0 = np.sqrt(complex(curve.f(points[0])))
    tracked = continue_branch(curve, points, y0)
    assert tracked[-1] == pytest.approx(-tracked[0])


def test_loop_around_everything_vanishes():
    curve = HyperellipticCurve()
    for power in (0, 1):
        assert abs(loop_period(curve, 0, 5, power)) < 1e-9


def test_periods_are_stable_in_tolerance():
    curve = HyperellipticCurve()
    coarse = loop_period(curve, 0, 1, 0, tol=1e-10)
    fine = loop_period(curve, 0, 1, 0, tol=1e-12)
    assert abs(coarse) > 0.1
    assert abs(coarse - fine) <= 1e-9 * abs(fine)


def test_first_relation(default_periods):
    assert riemann_relation_1(default_periods) < 1e-8
    assert skew_form(default_periods, 0, 0) == 0


def test_second_relation_after_orientation(default_periods):
    result = classical_relations(HyperellipticCurve())
    H = hermitian_form(result.period_matrix)
    assert np.allclose(H, H.conj().T, atol=1e-10)
    assert result.rel2_min_eig > 0
    assert result.rel1_residual < 1e-8
    assert riemann_relation_2(flip_b_cycles(result.period_matrix)) < 0


def test_record_is_json_shaped():
    record = hyperelliptic_record(classical_relations(HyperellipticCurve()))
    assert len(record["period_matrix"]) == 2
    assert len(record["period_matrix"][0]) == 4
    assert len(record["period_matrix"][0][0]) == 2
    assert isinstance(record["orientation_flipped"], bool)


def test_random_curves_satisfy_first_relation(rng):
    for _ in range(5):
        assert riemann_relation_1(random_curve(rng)) < 1e-7


def test_symmetric_curve_zero_periods():
    P = period_matrix(symmetric_curve())
    scale = np.max(np.abs(P))
    assert abs(P[1, 1]) < 1e-8 * scale
    assert abs(P[0, 2]) < 1e-8 * scale


def test_symplectic_change_preserves_relations(default_periods, rng):
    S = random_symplectic(rng)
    J = symplectic_form()
    assert np.array_equal(S.T @ J @ S, J)
    changed = symplectic_change(default_periods, S)
    assert riemann_relation_1(changed) < 1e-7
    sign = np.sign(riemann_relation_2(default_periods))
    assert np.sign(riemann_relation_2(changed)) == sign


def test_parallel_periods_match_serial():
    curve = HyperellipticCurve((-2.0, -1.1, 0.3, 0.9, 2.2, 3.0))
    assert np.array_equal(period_matrix(curve, threads=1), period_matrix(curve, threads=4))
