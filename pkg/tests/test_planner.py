import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quickster.alip import AlipState, GaitParams, alip_propagate
from quickster.planner import (Side, closed_loop_matrix, desired_touchdown, periodic_orbit,
                               pole_placement_gain, step_law, step_offsets,
                               update_touchdown_during_swing)

from oracles import gain

finite = dict(allow_nan=False, allow_infinity=False)
params_st = st.builds(GaitParams,
                      m=st.floats(10, 150, **finite), dz=st.floats(0.6, 1.1, **finite),
                      T=st.floats(0.2, 0.8, **finite), lam=st.floats(-0.9, 0.9, **finite),
                      mu=st.floats(0, 0.4, **finite),
                      v_d=st.tuples(st.floats(-1, 1.4, **finite), st.floats(-0.3, 0.3, **finite)))


def test_gain_and_offset_values():
    p = GaitParams(dz=0.9, T=0.4, lam=0.0, mu=0.25, v_d=(0.7, 0.0))
    assert pole_placement_gain(p) == pytest.approx(0.34938, abs=1e-5)
    assert pole_placement_gain(p) == pytest.approx(gain(p.m, p.g, p.dz, p.T, p.lam), rel=1e-14)
    off = step_offsets(p)
    assert off.xi_sw == pytest.approx(0.05268, abs=1e-5)
    assert off.xi_sp_x == pytest.approx(-0.10198, abs=1e-5)
    assert off.xi_sp_y == 0.0


@settings(max_examples=200, deadline=None)
@given(params_st)
def test_closed_loop_eigenvalues(p):
    A = closed_loop_matrix(p, pole_placement_gain(p))
    assert np.trace(A) == pytest.approx(p.lam, abs=1e-12)
    assert np.linalg.det(A) == pytest.approx(0.0, abs=1e-12)
    if abs(p.lam) > 1e-3:
        # A double zero eigenvalue is defective, so eig loses half the digits there.
        assert sorted(np.linalg.eigvals(A).real) == pytest.approx(sorted([p.lam, 0.0]), abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(params_st, st.floats(-0.2, 0.2, **finite), st.floats(-0.2, 0.2, **finite),
       st.floats(-1, 1, **finite), st.floats(-1, 1, **finite))
def test_step_law_equals_touchdown_of_propagated_state(p, x, y, vx, vy):
    s = AlipState.from_velocity(x, y, vx, vy, p.m, p.dz)
    end = alip_propagate(s, p, p.T)
    cmd = desired_touchdown(end, p, Side.LEFT)
    assert cmd.side is Side.RIGHT
    assert step_law(s, p, Side.LEFT) == pytest.approx(cmd.com_offset, abs=1e-9)
    assert cmd.position == pytest.approx((-cmd.com_offset[0], -cmd.com_offset[1]), abs=1e-12)


def _step(s, p, side):
    x, y = step_law(s, p, side)
    end = alip_propagate(s, p, p.T)
    return AlipState(x, y, end.Lx, end.Ly)


@settings(max_examples=100, deadline=None)
@given(params_st)
def test_periodic_orbit_is_a_fixed_point(p):
    s = periodic_orbit(p, Side.LEFT)
    nxt = _step(s, p, Side.LEFT)
    expect = periodic_orbit(p, Side.RIGHT)
    scale = np.array([1, 1, p.m * p.dz * p.omega, p.m * p.dz * p.omega])
    np.testing.assert_allclose(nxt.as_array() / scale, expect.as_array() / scale, atol=1e-10)


def _mean_speed(p):
    s, side, disp = periodic_orbit(p, Side.LEFT), Side.LEFT, np.zeros(2)
    for _ in range(2):
        end = alip_propagate(s, p, p.T)
        disp += (end.x - s.x, end.y - s.y)
        s, side = _step(s, p, side), side.other
    return disp / (2 * p.T)


def test_orbit_speed():
    vx, vy = _mean_speed(GaitParams(v_d=(0.7, 0.1)))
    assert vx / 0.7 == pytest.approx(vy / 0.1, rel=1e-9)
    # The offset law tracks the command closely only near the default eigenvalue.
    assert vx / 0.7 == pytest.approx(1.0, abs=0.01)
    assert _mean_speed(GaitParams(v_d=(0.7, 0.0), lam=0.0))[0] < 0.6


def test_orbit_width():
    p = GaitParams(v_d=(0.7, 0.1))
    left = periodic_orbit(p.replace(v_d=(0.0, 0.0)), Side.LEFT)
    assert left.y < 0  # CoM inboard of the left foot


def test_deadbeat_is_two_step_nilpotent():
    p = GaitParams(lam=0.0)
    A = closed_loop_matrix(p, pole_placement_gain(p))
    np.testing.assert_allclose(A @ A, np.zeros((2, 2)), atol=1e-9)


def test_reach_clamp():
    p = GaitParams(v_d=(0.5, 0.0))
    end = AlipState.from_velocity(0.2, 0.0, 3.0, 0.0, p.m, p.dz)
    free = desired_touchdown(end, p, Side.LEFT)
    cmd = desired_touchdown(end, p, Side.LEFT, reach=0.4)
    assert cmd.clamped and not free.clamped
    assert math.hypot(*cmd.from_stance) == pytest.approx(0.4)
    assert cmd.from_stance[0] / cmd.from_stance[1] == pytest.approx(
        free.from_stance[0] / free.from_stance[1])


def test_update_during_swing():
    p = GaitParams(v_d=(0.5, 0.0))
    s = periodic_orbit(p, Side.LEFT)
    mid = alip_propagate(s, p, 0.15)
    cmd = update_touchdown_during_swing(mid, p, p.T - 0.15, Side.LEFT)
    assert cmd.com_offset == pytest.approx(step_law(s, p, Side.LEFT), abs=1e-12)
    assert cmd.touchdown_time == pytest.approx(0.25)
    with pytest.raises(ValueError):
        update_touchdown_during_swing(mid, p, 0.5, Side.LEFT)
    with pytest.raises(ValueError):
        update_touchdown_during_swing(mid, p, -0.01, Side.LEFT)


def test_side_helpers():
    assert Side.LEFT.other is Side.RIGHT and Side.RIGHT.sign == -1
