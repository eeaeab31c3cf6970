"""Stance leg length policy: hold, straighten, hold at maximum, collapse."""
from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass
from typing import Tuple

_EPS = 1e-12


class Stage(enum.IntEnum):
    HOLD = 0
    STRAIGHTEN = 1
    MAX_HOLD = 2
    COLLAPSE = 3


@dataclass(frozen=True)
class LegLengthParams:
    """Leg length policy constants.

    Attributes:
        l0: leg length at the first touchdown [m]
        l_max: fully straightened length [m]
        a_str: straightening acceleration [m/s^2], positive
        a_cl: collapse acceleration [m/s^2], negative
        beta: stance fraction at which the collapse starts
        d_trigger: horizontal CoM-to-foot distance that starts straightening [m]
        floor_fraction: collapse halts at ``floor_fraction * l0``
        a_search: collapse acceleration once a step overruns its duration
            without ground contact [m/s^2], negative
        min_height: height reported when the leg cannot reach the CoM [m]
    """

    l0: float = 1.05
    l_max: float = 1.08
    a_str: float = 0.5
    a_cl: float = -0.02
    beta: float = 0.8
    d_trigger: float = 0.05
    floor_fraction: float = 0.5
    a_search: float = -3.0
    min_height: float = 0.05

    def __post_init__(self):
        if not 0 < self.l0 <= self.l_max:
            raise ValueError("0 < l0 <= l_max required")
        if not self.a_str > 0:
            raise ValueError("a_str must be positive")
        if not self.a_cl < 0:
            raise ValueError("a_cl must be negative")
        if not 0 < self.beta < 1:
            raise ValueError("0 < beta < 1 required")
        if not self.d_trigger >= 0:
            raise ValueError("d_trigger must be non-negative")
        if not self.a_search < 0:
            raise ValueError("a_search must be negative")
        if not 0 < self.floor_fraction <= 1:
            raise ValueError("floor_fraction must lie in (0, 1]")

    @property
    def floor(self) -> float:
        return self.floor_fraction * self.l0

    def replace(self, **changes) -> "LegLengthParams":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class LegLengthState:
    stage: Stage = Stage.HOLD
    l: float = 1.05
    l_dot: float = 0.0


def _straighten_accel(l: float, l_dot: float, p: LegLengthParams) -> float:
    # Decelerate once the stopping distance at a_str reaches l_max.
    if l_dot > 0 and p.l_max - l <= l_dot * l_dot / (2 * p.a_str) + _EPS:
        return -p.a_str
    return p.a_str


def _collapse_accel(l: float, l_dot: float, p: LegLengthParams) -> float:
    if l_dot > 0:
        # Still rising from a cut-short straighten: brake hard enough to stay below l_max.
        return min(p.a_cl, -p.a_str)
    if l <= p.floor + _EPS:
        return 0.0
    return p.a_cl


def acceleration(state: LegLengthState, params: LegLengthParams) -> float:
    """Current commanded leg acceleration."""
    if state.stage is Stage.STRAIGHTEN:
        return _straighten_accel(state.l, state.l_dot, params)
    if state.stage is Stage.COLLAPSE:
        return _collapse_accel(state.l, state.l_dot, params)
    return 0.0


def _roots_first_positive(a: float, b: float, c: float) -> float:
    """Smallest positive root of a t^2 + b t + c = 0, or inf."""
    if abs(a) < 1e-300:
        if b == 0:
            return math.inf
        t = -c / b
        return t if t > 0 else math.inf
    disc = b * b - 4 * a * c
    if disc < 0:
        return math.inf
    sq = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(sq, b))
    roots = [r for r in ((q / a), (c / q if q != 0 else math.inf)) if r > 0]
    return min(roots) if roots else math.inf


def _advance(stage: Stage, l: float, l_dot: float, p: LegLengthParams,
             dt: float) -> Tuple[Stage, float, float]:
    """Integrate the constant-acceleration segments over ``dt`` exactly."""
    remaining = dt
    for _ in range(8):
        if remaining <= 0:
            break
        if stage is Stage.STRAIGHTEN:
            if l >= p.l_max - _EPS and l_dot <= _EPS:
                stage, l, l_dot = Stage.MAX_HOLD, min(l, p.l_max), 0.0
                continue
            a = _straighten_accel(l, l_dot, p)
            if a > 0:
                # Time until l_max - l(t) = l_dot(t)^2 / (2 a).
                gap = p.l_max - l - l_dot * l_dot / (2 * a)
                tau = _roots_first_positive(a, 2 * l_dot, -gap)
            else:
                tau = l_dot / p.a_str
                # Too fast to stop in time: the leg stops at full extension.
                hit = _roots_first_positive(-0.5 * p.a_str, l_dot, l - p.l_max)
                if hit < tau:
                    if hit >= remaining:
                        l += l_dot * remaining + 0.5 * a * remaining ** 2
                        l_dot += a * remaining
                        remaining = 0.0
                    else:
                        stage, l, l_dot = Stage.MAX_HOLD, p.l_max, 0.0
                        remaining -= hit
                    continue
            if tau >= remaining:
                l += l_dot * remaining + 0.5 * a * remaining ** 2
                l_dot += a * remaining
                remaining = 0.0
            elif a > 0:
                l += l_dot * tau + 0.5 * a * tau ** 2
                l_dot += a * tau
                # Land exactly on the switching curve.
                l = p.l_max - l_dot * l_dot / (2 * p.a_str)
                remaining -= tau
            else:
                stage, l, l_dot = Stage.MAX_HOLD, p.l_max, 0.0
                remaining -= tau
        elif stage is Stage.COLLAPSE:
            a = _collapse_accel(l, l_dot, p)
            if a == 0.0:
                l_dot = 0.0
                remaining = 0.0
                continue
            if l_dot > 0:
                tau = l_dot / -a
                if tau >= remaining:
                    l += l_dot * remaining + 0.5 * a * remaining ** 2
                    l_dot += a * remaining
                    remaining = 0.0
                else:
                    l += 0.5 * l_dot * tau
                    l_dot = 0.0
                    remaining -= tau
                continue
            tau = _roots_first_positive(0.5 * a, l_dot, l - p.floor)
            if tau >= remaining:
                l += l_dot * remaining + 0.5 * a * remaining ** 2
                l_dot += a * remaining
                remaining = 0.0
            else:
                l, l_dot = p.floor, 0.0
                remaining -= tau
        else:
            l += l_dot * remaining
            remaining = 0.0
    return stage, l, l_dot


def next_stage(state: LegLengthState, params: LegLengthParams,
               stance_progress: float, com_to_foot_dist: float) -> Stage:
    """Stage after applying the sampled triggers at the current instant."""
    stage = state.stage
    if stage is not Stage.COLLAPSE and stance_progress >= params.beta:
        return Stage.COLLAPSE
    if stage is Stage.HOLD and com_to_foot_dist < params.d_trigger:
        return Stage.MAX_HOLD if state.l >= params.l_max else Stage.STRAIGHTEN
    return stage


def advance_leg(state: LegLengthState, params: LegLengthParams,
                stance_progress: float, com_to_foot_dist: float,
                dt: float) -> LegLengthState:
    """Apply the stage triggers, then integrate the leg over ``dt``.

    Triggers are sampled at the start of the interval.  Within the interval
    the profile is integrated exactly, including the arrival at ``l_max``
    and the collapse floor.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    stage = next_stage(state, params, stance_progress, com_to_foot_dist)
    l_dot = state.l_dot
    if stage is Stage.MAX_HOLD and state.stage is not Stage.MAX_HOLD:
        l_dot = 0.0
    stage, l, l_dot = _advance(stage, state.l, l_dot, params, dt)
    return LegLengthState(stage, l, l_dot)


def leg_position(state: LegLengthState, params: LegLengthParams,
                 tau: float) -> Tuple[float, float, float]:
    """``(l, l_dot, l_ddot)`` a time ``tau`` into the current stage, no triggers."""
    if tau <= 0:
        return state.l, state.l_dot, acceleration(state, params)
    stage, l, l_dot = _advance(state.stage, state.l, state.l_dot, params, tau)
    return l, l_dot, acceleration(LegLengthState(stage, l, l_dot), params)


def height_from_leg(l: float, com_offset: Tuple[float, float],
                    min_height: float = 0.05) -> Tuple[float, bool]:
    """CoM height above the foot for a straight leg of length ``l``.

    Returns ``(z, valid)``; ``valid`` is False when the leg cannot reach the
    CoM, in which case ``z`` is clamped to ``min_height``.
    """
    if not l > 0:
        raise ValueError("leg length must be positive")
    x, y = com_offset
    r2 = l * l - x * x - y * y
    if r2 <= 0:
        return min_height, False
    return math.sqrt(r2), True
