import dataclasses
import math

import numpy as np
import pytest

from quickster.alip import AlipState, GaitParams, alip_propagate
from quickster.planner import Side, periodic_orbit
from quickster.rolling_contact import RollingContactParams
from quickster.simulator import (FallEvent, ScenarioSpec, SimConfig, apply_push,
                                 apply_terrain_drop, impulse_from_velocity, initial_world,
                                 run_scenario, step_once, with_push)

IDEAL = SimConfig(height_mode="constant", gait=GaitParams(v_d=(0.5, 0.0)), n_steps=6)


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(control_dt=3e-3)
    with pytest.raises(ValueError):
        SimConfig(integrator_dt=3e-4)
    with pytest.raises(ValueError):
        SimConfig(height_mode="bouncy")
    with pytest.raises(ValueError):
        SimConfig(n_steps=2, scenario=ScenarioSpec(pushes=((5.0, 0.0, 1.0),)))
    with pytest.raises(ValueError):
        SimConfig(n_steps=2, scenario=ScenarioSpec(terrain_drops=((2, 0.05),)))
    with pytest.raises(ValueError):
        ScenarioSpec(terrain_drops=((1, -0.05),))


def test_scenario_commands():
    sc = ScenarioSpec(velocity_profile=((1.0, 0.3, 0.0, 0.1), (0.0, 0.5, 0.0, 0.0)))
    assert sc.command_at(0.5, (0.7, 0.0)) == (0.5, 0.0, 0.0)
    assert sc.command_at(1.0, (0.7, 0.0)) == (0.3, 0.0, 0.1)
    assert ScenarioSpec().command_at(2.0, (0.7, 0.1)) == (0.7, 0.1, 0.0)
    assert ScenarioSpec(terrain_drops=((3, 0.02), (3, 0.01))).drop_for_step(3) == 0.03


def test_ideal_stance_matches_closed_form():
    world = initial_world(IDEAL)
    _, rec = step_once(world, IDEAL)
    start = world.alip
    for k in range(0, len(rec.t), 17):
        expect = alip_propagate(start, IDEAL.gait, rec.t[k])
        assert rec.com_offset[k] == pytest.approx((expect.x, expect.y), abs=1e-12)
        v = expect.velocity(IDEAL.gait.m, IDEAL.gait.dz)
        assert rec.com_velocity[k, :2] == pytest.approx(v, abs=1e-11)


def test_ideal_walk_stays_on_the_orbit():
    records, events = run_scenario(IDEAL)
    assert events == []
    p = IDEAL.gait
    for r in records:
        side = Side(r.stance_side)
        orbit = periodic_orbit(p, side)
        assert r.com_offset[0] == pytest.approx((orbit.x, orbit.y), abs=1e-10)
        assert r.duration == pytest.approx(p.T)
    sides = [r.stance_side for r in records]
    assert sides[:3] == ["left", "right", "left"]


def test_default_walk_tracks_speed():
    cfg = SimConfig(gait=GaitParams(v_d=(0.5, 0.0)), n_steps=16)
    records, _ = run_scenario(cfg)
    tail = records[8:]
    dist = tail[-1].com_position[-1, 0] - tail[0].com_position[0, 0]
    dur = tail[-1].t[-1] - tail[0].t[0]
    assert dist / dur == pytest.approx(0.5, rel=0.05)
    for r in records:
        assert np.all(r.height > 0.9)
        assert r.leg_length.max() <= cfg.leg.l_max + 1e-12
        assert np.isfinite(r.swing_foot).all()
        # Swing foot lands where the next stance starts.
        assert r.swing_foot[-1, :2] == pytest.approx(r.next_foot[:2], abs=1e-9)


def test_turning_rotates_heading():
    sc = ScenarioSpec(velocity_profile=((0.0, 0.4, 0.0, 0.5),))
    cfg = SimConfig(n_steps=10, scenario=sc)
    records, _ = run_scenario(cfg)
    assert records[-1].heading == pytest.approx(0.5 * 0.4 * 9)
    for r in records[3:]:
        m = r.forward_velocity().mean()
        assert 0.3 < m < 0.5


def test_push_changes_momentum_and_fall_is_reported():
    w = initial_world(IDEAL)
    pushed = apply_push(w, (1.0, -2.0), IDEAL)
    assert (pushed.alip.Lx - w.alip.Lx, pushed.alip.Ly - w.alip.Ly) == (1.0, -2.0)
    assert apply_push(w, (0.0, 0.0)) is w
    big = with_push(SimConfig(n_steps=6), 0.0, 500.0, push_step=2)
    with pytest.raises(FallEvent) as info:
        run_scenario(big)
    fall = info.value
    assert fall.step_index >= 2 and len(fall.records) == fall.step_index
    assert fall.events and "fall" in fall.events[-1]


def test_impulse_direction():
    g = GaitParams()
    dLx, dLy = impulse_from_velocity((0.0, 1.0), g)
    assert dLx == pytest.approx(-g.m * g.dz) and dLy == 0.0
    cfg = with_push(SimConfig(n_steps=8), math.pi / 2, 10.0, push_step=3, phase=0.25)
    t, px, py = cfg.scenario.pushes[-1]
    assert t == pytest.approx(3.25 * g.T)
    assert (px, py) == pytest.approx((-10.0, 0.0), abs=1e-12)


def test_push_jitter_is_seeded():
    base = SimConfig(n_steps=4, scenario=ScenarioSpec(pushes=((0.5, 0.0, 10.0),),
                                                       push_jitter=0.2))
    a = run_scenario(base)[1]
    b = run_scenario(base)[1]
    c = run_scenario(base.replace(seed=7))[1]
    assert a == b and a != c


def test_terrain_drop_is_walked_over():
    cfg = SimConfig(gait=GaitParams(v_d=(0.7, 0.0)), n_steps=12,
                    scenario=ScenarioSpec(terrain_drops=((5, 0.05),)))
    records, events = run_scenario(cfg)
    assert any("terrain drop" in e for e in events)
    assert records[6].stance_foot[2] == pytest.approx(-0.05)
    assert records[5].duration > cfg.gait.T
    w = apply_terrain_drop(initial_world(cfg), 0.02)
    assert w.pending_drop == 0.02
    with pytest.raises(ValueError):
        apply_terrain_drop(w, -0.01)


def test_large_drop_falls():
    cfg = SimConfig(gait=GaitParams(v_d=(0.7, 0.0)), n_steps=8,
                    scenario=ScenarioSpec(terrain_drops=((3, 0.5),)))
    with pytest.raises(FallEvent):
        run_scenario(cfg)


def test_rolling_contact_cop_in_sole():
    rc = RollingContactParams(enabled=True)
    cfg = SimConfig(gait=GaitParams(v_d=(0.5, 0.0)), rolling=rc, n_steps=4)
    records, _ = run_scenario(cfg)
    for r in records:
        cop = r.cop_forward()
        assert cop.min() >= -rc.heel_extent - 1e-12 and cop.max() <= rc.toe_extent + 1e-12
        assert cop[0] == pytest.approx(-rc.heel_extent)


def test_momentum_transfer_modes_agree_on_level_constant_height():
    a, _ = run_scenario(IDEAL)
    b, _ = run_scenario(IDEAL.replace(momentum_transfer="carry"))
    assert a[-1].com_offset[-1] == pytest.approx(b[-1].com_offset[-1], abs=1e-12)
