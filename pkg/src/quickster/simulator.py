"""Hybrid closed-loop walking simulation.

The plant is a point mass above the stance ankle whose horizontal motion
follows the ALIP field with the instantaneous CoM height::

    x_dot = Ly / (m z),   y_dot = -Lx / (m z)
    Ly_dot = m g (x - cop_x),   Lx_dot = -m g (y - cop_y)

In ``height_mode="leg"`` the height is ``z = sqrt(l^2 - x^2 - y^2)`` with
the stance leg length ``l(t)`` from the leg-length policy.  In
``height_mode="constant"`` it is the nominal ``dz`` and the plant is the
ideal ALIP.  Feet exchange instantaneously at touchdown.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import leg_length as legmod
from .alip import AlipState, GaitParams, reexpress
from .leg_length import LegLengthParams, LegLengthState, Stage
from .metrics import StrideRecord
from .planner import FootstepCommand, Side, periodic_orbit, update_touchdown_during_swing
from .rolling_contact import RollingContactParams, effective_frequency

Vec3 = Tuple[float, float, float]

HEIGHT_MODES = ("leg", "constant")
MOMENTUM_TRANSFERS = ("recompute", "carry")
PLANNER_FREQUENCIES = ("nominal", "effective")


@dataclass(frozen=True)
class ScenarioSpec:
    """Commands and disturbances over a run.

    Attributes:
        velocity_profile: rows ``(t_start, vx, vy, yaw_rate)`` in the body
            frame, piecewise constant; empty means ``gait.v_d`` and no turn.
        pushes: rows ``(t, dLx, dLy)`` of momentum impulses [kg m^2/s].
        terrain_drops: rows ``(step_index, drop)``; the touchdown ending that
            step lands ``drop`` metres lower.
        push_jitter: relative standard deviation applied to each push.
    """

    name: str = "default"
    velocity_profile: Tuple[Tuple[float, float, float, float], ...] = ()
    pushes: Tuple[Tuple[float, float, float], ...] = ()
    terrain_drops: Tuple[Tuple[int, float], ...] = ()
    push_jitter: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "velocity_profile",
                           tuple(tuple(float(v) for v in row) for row in self.velocity_profile))
        object.__setattr__(self, "pushes",
                           tuple(tuple(float(v) for v in row) for row in self.pushes))
        object.__setattr__(self, "terrain_drops",
                           tuple((int(k), float(d)) for k, d in self.terrain_drops))
        for row in self.velocity_profile:
            if len(row) != 4:
                raise ValueError("velocity_profile rows are (t, vx, vy, yaw_rate)")
        for row in self.pushes:
            if len(row) != 3:
                raise ValueError("push rows are (t, dLx, dLy)")
        for k, d in self.terrain_drops:
            if d < 0:
                raise ValueError("terrain drops must be non-negative")
        if self.push_jitter < 0:
            raise ValueError("push_jitter must be non-negative")

    def command_at(self, t: float, default: Tuple[float, float]) -> Tuple[float, float, float]:
        cmd = (default[0], default[1], 0.0)
        for t0, vx, vy, yaw in sorted(self.velocity_profile):
            if t0 <= t + 1e-12:
                cmd = (vx, vy, yaw)
        return cmd

    def drop_for_step(self, k: int) -> float:
        return sum(d for idx, d in self.terrain_drops if idx == k)


@dataclass(frozen=True)
class SimConfig:
    gait: GaitParams = field(default_factory=GaitParams)
    leg: LegLengthParams = field(default_factory=LegLengthParams)
    rolling: RollingContactParams = field(default_factory=RollingContactParams)
    integrator_dt: float = 1e-4
    control_dt: float = 2e-3
    n_steps: int = 20
    scenario: ScenarioSpec = field(default_factory=ScenarioSpec)
    seed: int = 0
    height_mode: str = "leg"
    momentum_transfer: str = "recompute"
    planner_frequency: str = "nominal"
    reach_fraction: float = 0.9
    swing_clearance: float = 0.05
    max_step_extension: float = 0.4
    fall_samples: int = 3
    max_height_projection: float = 0.01

    def __post_init__(self):
        T = self.gait.T
        if not 0 < self.integrator_dt <= self.control_dt <= T:
            raise ValueError("0 < integrator_dt <= control_dt <= T required")
        for num, den, label in ((T, self.control_dt, "T / control_dt"),
                                (self.control_dt, self.integrator_dt,
                                 "control_dt / integrator_dt")):
            ratio = num / den
            if abs(ratio - round(ratio)) > 1e-6:
                raise ValueError(f"{label} must be an integer, got {ratio!r}")
        if self.n_steps < 1:
            raise ValueError("n_steps >= 1 required")
        if self.height_mode not in HEIGHT_MODES:
            raise ValueError(f"height_mode must be one of {HEIGHT_MODES}")
        if self.momentum_transfer not in MOMENTUM_TRANSFERS:
            raise ValueError(f"momentum_transfer must be one of {MOMENTUM_TRANSFERS}")
        if self.planner_frequency not in PLANNER_FREQUENCIES:
            raise ValueError(f"planner_frequency must be one of {PLANNER_FREQUENCIES}")
        if not 0 < self.reach_fraction <= 1:
            raise ValueError("reach_fraction must lie in (0, 1]")
        if self.max_step_extension < 0 or self.fall_samples < 1 or self.max_height_projection < 0:
            raise ValueError("max_step_extension >= 0 and fall_samples >= 1 required")
        horizon = self.n_steps * T
        for t, _, _ in self.scenario.pushes:
            if not 0 <= t <= horizon:
                raise ValueError(f"push at t={t} outside the horizon [0, {horizon}]")
        for t, *_ in self.scenario.velocity_profile:
            if not 0 <= t <= horizon:
                raise ValueError(f"velocity change at t={t} outside the horizon")
        for k, _ in self.scenario.terrain_drops:
            if not 0 <= k < self.n_steps:
                raise ValueError(f"terrain drop at step {k} outside [0, {self.n_steps})")

    @property
    def reach(self) -> float:
        return self.reach_fraction * self.leg.l_max

    @property
    def planner_omega(self) -> float:
        if self.planner_frequency == "effective":
            return effective_frequency(self.gait, self.rolling)
        return self.gait.omega

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)


class FallEvent(Exception):
    """The walker left the recoverable region."""

    def __init__(self, step_index: int, time: float, reason: str,
                 diagnostics: Optional[dict] = None):
        super().__init__(f"fall at step {step_index} (t={time:.4f} s): {reason}")
        self.step_index = step_index
        self.time = time
        self.reason = reason
        self.diagnostics = diagnostics or {}
        self.records: List[StrideRecord] = []
        self.events: List[str] = []


@dataclass(frozen=True)
class WorldState:
    """Full hybrid state.  ``alip`` is relative to the stance ankle, world axes."""

    stance_foot: Vec3
    stance_side: Side
    alip: AlipState
    leg: LegLengthState
    swing_foot: Vec3
    time_in_step: float
    com_position: Vec3
    com_velocity: Vec3
    heading: float = 0.0
    time: float = 0.0
    step_index: int = 0
    pending_drop: float = 0.0

    def replace(self, **changes) -> "WorldState":
        return dataclasses.replace(self, **changes)


def _rot(c: float, s: float, x: float, y: float) -> Tuple[float, float]:
    return c * x - s * y, s * x + c * y


def _to_heading(state: AlipState, c: float, s: float) -> AlipState:
    # (x, y) and the velocity-like momentum (Ly, -Lx) rotate as vectors.
    x, y = _rot(c, -s, state.x, state.y)
    Ly, nLx = _rot(c, -s, state.Ly, -state.Lx)
    return AlipState(x, y, -nLx, Ly)


def _height(config: SimConfig, l: float, x: float, y: float) -> Tuple[float, bool]:
    if config.height_mode == "constant":
        return config.gait.dz, True
    return legmod.height_from_leg(l, (x, y), config.leg.min_height)


def _kinematics(config: SimConfig, st: AlipState, l: float, l_dot: float,
                l_ddot: float, cop: Tuple[float, float]):
    """Height, CoM velocity and height acceleration at one instant."""
    m, g = config.gait.m, config.gait.g
    z, valid = _height(config, l, st.x, st.y)
    vx, vy = st.Ly / (m * z), -st.Lx / (m * z)
    if config.height_mode == "constant":
        return z, valid, (vx, vy, 0.0), 0.0
    vz = (l * l_dot - st.x * vx - st.y * vy) / z
    ax = g * (st.x - cop[0]) / z - vx * vz / z
    ay = g * (st.y - cop[1]) / z - vy * vz / z
    az = (l * l_ddot + l_dot * l_dot - vx * vx - vy * vy
          - st.x * ax - st.y * ay - vz * vz) / z
    return z, valid, (vx, vy, vz), az


def initial_world(config: SimConfig, heading: float = 0.0) -> WorldState:
    """Left stance at the origin, started on the ideal-plant limit cycle."""
    vx, vy, _ = config.scenario.command_at(0.0, config.gait.v_d)
    gait = config.gait.replace(v_d=(vx, vy))
    orbit = periodic_orbit(gait, Side.LEFT, omega=config.planner_omega)
    c, s = math.cos(heading), math.sin(heading)
    st = _to_heading(orbit, c, -s)
    leg = LegLengthState(Stage.HOLD, config.leg.l0, 0.0)
    z, _ = _height(config, leg.l, st.x, st.y)
    scale = z / gait.dz
    st = AlipState(st.x, st.y, st.Lx * scale, st.Ly * scale)
    swing_offset = _rot(c, s, 0.0, -gait.mu)
    _, _, vel, _ = _kinematics(config, st, leg.l, 0.0, 0.0, (0.0, 0.0))
    return WorldState(
        stance_foot=(0.0, 0.0, 0.0), stance_side=Side.LEFT, alip=st, leg=leg,
        swing_foot=(swing_offset[0], swing_offset[1], 0.0), time_in_step=0.0,
        com_position=(st.x, st.y, z), com_velocity=vel, heading=heading)


def apply_push(world: WorldState, impulse: Sequence[float],
               config: Optional[SimConfig] = None) -> WorldState:
    """Add a momentum impulse ``(dLx, dLy)`` to the ALIP state."""
    dLx, dLy = float(impulse[0]), float(impulse[1])
    if dLx == 0.0 and dLy == 0.0:
        return world
    st = world.alip
    new = AlipState(st.x, st.y, st.Lx + dLx, st.Ly + dLy)
    if config is None:
        return world.replace(alip=new)
    z = world.com_position[2] - world.stance_foot[2]
    m = config.gait.m
    vel = (new.Ly / (m * z), -new.Lx / (m * z), world.com_velocity[2])
    return world.replace(alip=new, com_velocity=vel)


def apply_terrain_drop(world: WorldState, drop: float) -> WorldState:
    """Lower the ground under the next touchdown by ``drop`` metres (blind)."""
    if drop < 0:
        raise ValueError("drop must be non-negative")
    return world.replace(pending_drop=world.pending_drop + drop)


def impulse_from_velocity(dv: Sequence[float], gait: GaitParams) -> Tuple[float, float]:
    """Momentum impulse ``(dLx, dLy)`` producing a CoM velocity change ``dv``."""
    mdz = gait.m * gait.dz
    return -mdz * float(dv[1]), mdz * float(dv[0])


def _smoothstep5(tau: float) -> float:
    return tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau))


def step_once(world: WorldState, config: SimConfig) -> Tuple[WorldState, StrideRecord]:
    """Simulate one stance from touchdown to the next touchdown.

    Raises:
        FallEvent: CoM beyond reach, persistent height loss, or a touchdown
            that needs more leg than ``l_max``.
    """
    gait, legp, rc = config.gait, config.leg, config.rolling
    m, g = gait.m, gait.g
    mg = m * g
    T, dt = gait.T, config.integrator_dt
    n_sub = int(round(T / dt))
    k_ctrl = int(round(config.control_dt / dt))
    n_max = n_sub + int(round(config.max_step_extension / dt))
    reach = config.reach
    omega = config.planner_omega
    constant_height = config.height_mode == "constant"
    dz = gait.dz
    zmin = legp.min_height
    legp_search = legp.replace(a_cl=legp.a_search)

    vx_b, vy_b, yaw_rate = config.scenario.command_at(world.time, gait.v_d)
    plan_gait = gait.replace(v_d=(vx_b, vy_b))
    psi = world.heading
    ch, sh = math.cos(psi), math.sin(psi)
    drop = world.pending_drop + config.scenario.drop_for_step(world.step_index)

    rolling_on = rc.enabled
    alpha, heel, toe, half_w = rc.alpha, rc.heel_extent, rc.toe_extent, rc.half_width
    i_heel = int(math.ceil(rc.heel_hold_fraction * n_sub - 1e-9))
    heel_cop = _rot(ch, sh, -heel, 0.0)

    foot = world.stance_foot
    side = world.stance_side
    x, y, Lx, Ly = world.alip.x, world.alip.y, world.alip.Lx, world.alip.Ly
    leg = world.leg
    t0 = world.time
    lift = world.swing_foot

    pushes = [(i, p) for i, p in enumerate(config.scenario.pushes)]
    rng_seed = config.seed

    def cop_at(xq: float, yq: float, heel_phase: bool) -> Tuple[float, float]:
        if not rolling_on:
            return 0.0, 0.0
        if heel_phase:
            return heel_cop
        xf = ch * xq + sh * yq
        yf = -sh * xq + ch * yq
        xf = alpha * xf
        yf = alpha * yf
        xf = -heel if xf < -heel else toe if xf > toe else xf
        yf = -half_w if yf < -half_w else half_w if yf > half_w else yf
        return ch * xf - sh * yf, sh * xf + ch * yf

    def deriv(xq, yq, Lxq, Lyq, lq, heel_phase):
        if constant_height:
            z = dz
        else:
            r2 = lq * lq - xq * xq - yq * yq
            z = math.sqrt(r2) if r2 > zmin * zmin else zmin
        cx, cy = cop_at(xq, yq, heel_phase)
        mz = m * z
        return Lyq / mz, -Lxq / mz, -mg * (yq - cy), mg * (xq - cx)

    samples = []
    events: List[str] = []
    command: Optional[FootstepCommand] = None
    target = (foot[0], foot[1])
    invalid_run = 0
    z_at_T = None
    descent = 0.0
    i = 0
    while True:
        t_step = i * dt
        t_abs = t0 + t_step
        for idx, (tp, dLx, dLy) in pushes:
            if t_abs - 1e-12 <= tp < t_abs + dt - 1e-12:
                scale = 1.0
                if config.scenario.push_jitter > 0:
                    rng = np.random.default_rng([rng_seed, idx])
                    scale += config.scenario.push_jitter * float(rng.standard_normal())
                Lx += dLx * scale
                Ly += dLy * scale
                events.append(f"push t={tp:.6g} dL=({dLx * scale:.6g},{dLy * scale:.6g})")

        heel_phase = rolling_on and i < i_heel
        st = AlipState(x, y, Lx, Ly)
        tick = i % k_ctrl == 0
        at_end = i >= n_sub
        if at_end:
            z_now, _ = _height(config, leg.l, x, y)
            if z_at_T is None:
                z_at_T = z_now
            descent = z_at_T - z_now
        if tick or at_end:
            tr = max(T - t_step, 0.0)
            command = update_touchdown_during_swing(_to_heading(st, ch, sh), plan_gait, tr,
                                                    side, reach=reach, omega=omega)
            fx, fy = _rot(ch, sh, *command.from_stance)
            target = (foot[0] + fx, foot[1] + fy)
            if command.clamped and "clamped" not in events:
                events.append("clamped")
        touchdown = False
        if at_end:
            if drop <= 0.0:
                touchdown = True
            elif constant_height:
                touchdown = descent >= drop
            else:
                # Blind drop: the swing leg extends up to l_max toward the lowered ground.
                rx, ry = x - (target[0] - foot[0]), y - (target[1] - foot[1])
                z_new = z_now + drop
                touchdown = z_new * z_new + rx * rx + ry * ry <= legp.l_max ** 2

        if tick or touchdown:
            l, l_dot = leg.l, leg.l_dot
            # Left limit: the overrun collapse only acts after T.
            l_dd = legmod.acceleration(leg, legp_search if i > n_sub else legp)
            cop = cop_at(x, y, heel_phase)
            z, valid, vel, az = _kinematics(config, st, l, l_dot, l_dd, cop)
            tau = min(t_step / T, 1.0)
            blend = _smoothstep5(tau)
            sw_z = foot[2] + config.swing_clearance * 16 * tau * tau * (1 - tau) ** 2
            if at_end:
                sw_z = foot[2] - descent
            sw = (lift[0] + (target[0] - lift[0]) * blend,
                  lift[1] + (target[1] - lift[1]) * blend, sw_z)
            samples.append((t_abs, x, y, foot[0] + x, foot[1] + y, foot[2] + z,
                            vel[0], vel[1], vel[2], cop[0], cop[1], l, z, az,
                            sw[0], sw[1], sw[2]))
            invalid_run = 0 if valid else invalid_run + 1
            if invalid_run >= config.fall_samples:
                raise FallEvent(world.step_index, t_abs, "leg cannot reach the CoM",
                                {"x": x, "y": y, "l": l})
        if touchdown:
            break
        if i >= n_max:
            raise FallEvent(world.step_index, t_abs, "swing leg cannot reach the ground",
                            {"descent": descent, "drop": drop, "leg_length": leg.l})

        progress = i / n_sub
        fwd_dist = abs(ch * x + sh * y)
        lp = legp_search if at_end else legp
        stage = legmod.next_stage(leg, lp, progress, fwd_dist)
        if stage is not leg.stage:
            l_dot0 = 0.0 if stage is Stage.MAX_HOLD else leg.l_dot
            leg = LegLengthState(stage, leg.l, l_dot0)
        l_half = legmod.leg_position(leg, lp, 0.5 * dt)[0]
        stage_n, l_n, ld_n = legmod._advance(leg.stage, leg.l, leg.l_dot, lp, dt)

        k1 = deriv(x, y, Lx, Ly, leg.l, heel_phase)
        h2 = 0.5 * dt
        k2 = deriv(x + h2 * k1[0], y + h2 * k1[1], Lx + h2 * k1[2], Ly + h2 * k1[3],
                   l_half, heel_phase)
        k3 = deriv(x + h2 * k2[0], y + h2 * k2[1], Lx + h2 * k2[2], Ly + h2 * k2[3],
                   l_half, heel_phase)
        k4 = deriv(x + dt * k3[0], y + dt * k3[1], Lx + dt * k3[2], Ly + dt * k3[3],
                   l_n, heel_phase)
        d6 = dt / 6.0
        x += d6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        y += d6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        Lx += d6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        Ly += d6 * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
        leg = LegLengthState(stage_n, l_n, ld_n)
        i += 1

        if abs(x) > reach or abs(y) > reach:
            raise FallEvent(world.step_index, t0 + i * dt, "CoM beyond reach",
                            {"x": x, "y": y, "reach": reach})

    t_end = t0 + i * dt
    st_end = AlipState(x, y, Lx, Ly)
    z_before, _ = _height(config, leg.l, x, y)
    ground_new = foot[2] - drop
    shift = (target[0] - foot[0], target[1] - foot[1])
    if constant_height:
        z_after = dz
        z_before = dz
    else:
        z_after = z_before + drop
    new_alip = reexpress(st_end, shift, m, z_before, z_after,
                         recompute=config.momentum_transfer == "recompute")
    r2 = new_alip.x ** 2 + new_alip.y ** 2
    l_new = math.sqrt(z_after * z_after + r2)
    if not constant_height and l_new > legp.l_max:
        # Project the CoM onto the sphere the new leg can reach.
        if legp.l_max ** 2 <= r2:
            raise FallEvent(world.step_index, t_end, "touchdown beyond leg reach",
                            {"leg_length": l_new, "l_max": legp.l_max})
        z_proj = math.sqrt(legp.l_max ** 2 - r2)
        if z_after - z_proj > config.max_height_projection:
            raise FallEvent(world.step_index, t_end, "touchdown beyond leg reach",
                            {"leg_length": l_new, "l_max": legp.l_max})
        events.append(f"height projected {z_after - z_proj:.3g} m")
        new_alip = reexpress(st_end, shift, m, z_before, z_proj,
                             recompute=config.momentum_transfer == "recompute")
        z_after, l_new = z_proj, legp.l_max
    if drop > 0:
        events.append(f"terrain drop {drop:.6g}")
    if i > n_sub:
        events.append(f"touchdown delayed {(i - n_sub) * dt:.6g} s")

    arr = np.array(samples)
    record = StrideRecord(
        t=arr[:, 0], com_offset=arr[:, 1:3], com_position=arr[:, 3:6],
        com_velocity=arr[:, 6:9], cop_offset=arr[:, 9:11], leg_length=arr[:, 11],
        height=arr[:, 12], height_accel=arr[:, 13], swing_foot=arr[:, 14:17],
        step_index=world.step_index, stance_side=side.value, stance_foot=foot,
        next_foot=(target[0], target[1], ground_new), heading=psi, events=events)

    new_leg = LegLengthState(Stage.HOLD, l_new if not constant_height else legp.l0, 0.0)
    last = samples[-1]
    new_world = WorldState(
        stance_foot=(target[0], target[1], ground_new),
        stance_side=side.other,
        alip=new_alip,
        leg=new_leg,
        swing_foot=foot,
        time_in_step=0.0,
        com_position=(last[3], last[4], ground_new + z_after),
        com_velocity=(last[6], last[7], last[8]),
        heading=psi + yaw_rate * T,
        time=t_end,
        step_index=world.step_index + 1,
        pending_drop=0.0,
    )
    return new_world, record


def run_scenario(config: SimConfig, world: Optional[WorldState] = None
                 ) -> Tuple[List[StrideRecord], List[str]]:
    """Run ``config.n_steps`` steps.  Deterministic for a given config.

    Raises:
        FallEvent: with ``records`` and ``events`` collected before the fall.
    """
    world = initial_world(config) if world is None else world
    records: List[StrideRecord] = []
    events: List[str] = []
    for _ in range(config.n_steps):
        try:
            world, rec = step_once(world, config)
        except FallEvent as fall:
            fall.records = records
            fall.events = events + [str(fall)]
            raise
        records.append(rec)
        events.extend(f"step {rec.step_index}: {e}" for e in rec.events)
    return records, events


def with_push(config: SimConfig, direction: float, magnitude: float,
              push_step: int = 6, phase: float = 0.5) -> SimConfig:
    """Config with one impulse of ``magnitude`` [kg m^2/s] mid-step.

    ``direction`` [rad] is the CoM velocity direction the push produces,
    measured from the initial heading.
    """
    dLx, dLy = impulse_from_velocity((math.cos(direction), math.sin(direction)), config.gait)
    scale = magnitude / math.hypot(dLx, dLy)
    t_push = (push_step + phase) * config.gait.T
    push = (t_push, dLx * scale, dLy * scale)
    scenario = dataclasses.replace(config.scenario, pushes=config.scenario.pushes + (push,))
    return config.replace(scenario=scenario)


def survives(config: SimConfig) -> bool:
    try:
        run_scenario(config)
    except FallEvent:
        return False
    return True


def max_recoverable_impulse(config: SimConfig, direction: float, push_step: int = 6,
                            upper: float = 400.0, tol: float = 1.0) -> float:
    """Largest mid-step impulse magnitude in ``direction`` that causes no fall.

    Bisection on ``[0, upper]``; assumes recoverability is monotone in the
    magnitude.  Returns ``upper`` when even that is survived.
    """
    if survives(with_push(config, direction, upper, push_step)):
        return upper
    lo, hi = 0.0, upper
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if survives(with_push(config, direction, mid, push_step)):
            lo = mid
        else:
            hi = mid
    return lo
