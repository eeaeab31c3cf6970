"""Step placement from the predicted end-of-step ALIP state.

The touchdown law places the next contact so that the CoM offset from the
new foot is ``-k_p * L / (m dz)`` of the momentum predicted at touchdown,
shifted by capture-point speed and width offsets.  ``k_p`` is chosen by
pole placement on the closed-loop step-to-step matrix.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .alip import AlipState, GaitParams, alip_propagate


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"

    @property
    def other(self) -> "Side":
        return Side.RIGHT if self is Side.LEFT else Side.LEFT

    @property
    def sign(self) -> int:
        """+1 for the left foot, which lies on the +y side of the CoM path."""
        return 1 if self is Side.LEFT else -1


@dataclass(frozen=True)
class StepOffsets:
    xi_sw: float
    xi_sp_x: float
    xi_sp_y: float


@dataclass(frozen=True)
class FootstepCommand:
    """Touchdown target for the swing foot.

    Attributes:
        com_offset: CoM position relative to the new foot at touchdown,
            i.e. the initial ALIP offset of the next step.
        position: touchdown point relative to the CoM at touchdown
            (the negation of ``com_offset`` unless clamped).
        from_stance: touchdown point relative to the current stance foot.
        side: stance side after touchdown.
        touchdown_time: time left until the scheduled touchdown [s].
        clamped: True when the reach limit moved the target.
    """

    com_offset: Tuple[float, float]
    position: Tuple[float, float]
    from_stance: Tuple[float, float]
    side: Side
    touchdown_time: float
    clamped: bool = False


def _cs(params: GaitParams, omega: Optional[float]) -> Tuple[float, float, float]:
    w = params.omega if omega is None else omega
    return w, math.cosh(w * params.T), math.sinh(w * params.T)


def pole_placement_gain(params: GaitParams, omega: Optional[float] = None) -> float:
    """Gain [s] putting the nonzero closed-loop eigenvalue at ``params.lam``.

    The mass-height factor cancels when the placement law is substituted
    into the transition map, so the gain carries units of seconds.
    """
    w, c, s = _cs(params, omega)
    if s == 0.0:
        raise ValueError("pole placement needs T > 0")
    return (c - params.lam) / (w * s)


def closed_loop_matrix(params: GaitParams, k_p: float,
                       omega: Optional[float] = None) -> np.ndarray:
    """Step-to-step map of ``(x_k, Ly_k)`` under the placement law (rank one)."""
    w, c, s = _cs(params, omega)
    mdz = params.m * params.dz
    return np.array([[-k_p * w * s, -k_p * c / mdz],
                     [mdz * w * s, c]])


def step_offsets(params: GaitParams, omega: Optional[float] = None) -> StepOffsets:
    w = params.omega if omega is None else omega
    e = math.exp(w * params.T)
    vx, vy = params.v_d
    return StepOffsets(xi_sw=params.mu / (1.0 + e),
                       xi_sp_x=-vx * params.T / (e - 1.0),
                       xi_sp_y=-vy * params.T / (e - 1.0))


def _placement(Lx_end: float, Ly_end: float, params: GaitParams, upcoming: Side,
               k_p: float, off: StepOffsets) -> Tuple[float, float]:
    mdz = params.m * params.dz
    x_next = -k_p * Ly_end / mdz - off.xi_sp_x
    y_next = k_p * Lx_end / mdz - off.xi_sp_y - upcoming.sign * off.xi_sw
    return x_next, y_next


def step_law(start_state: AlipState, params: GaitParams, stance_side: Side,
             omega: Optional[float] = None) -> Tuple[float, float]:
    """Next-step CoM offset written in terms of the start-of-step state.

    Identical to :func:`desired_touchdown` applied to the state propagated
    over a full step.
    """
    w, c, s = _cs(params, omega)
    k_p = pole_placement_gain(params, omega)
    off = step_offsets(params, omega)
    mdz = params.m * params.dz
    x_next = -k_p * w * start_state.x * s - k_p * start_state.Ly * c / mdz - off.xi_sp_x
    y_next = (-k_p * w * start_state.y * s + k_p * start_state.Lx * c / mdz
              - off.xi_sp_y - stance_side.other.sign * off.xi_sw)
    return x_next, y_next


def desired_touchdown(predicted_end_state: AlipState, params: GaitParams,
                      stance_side: Side, reach: Optional[float] = None,
                      touchdown_time: float = 0.0,
                      omega: Optional[float] = None) -> FootstepCommand:
    """Touchdown target for the swing foot given the state at touchdown.

    ``stance_side`` is the current stance foot; the command is for the
    opposite foot.  ``reach`` bounds the planar distance from the stance
    foot to the target.
    """
    upcoming = stance_side.other
    k_p = pole_placement_gain(params, omega)
    off = step_offsets(params, omega)
    cx, cy = _placement(predicted_end_state.Lx, predicted_end_state.Ly,
                        params, upcoming, k_p, off)
    px, py = predicted_end_state.x, predicted_end_state.y
    fx, fy = px - cx, py - cy
    clamped = False
    if reach is not None:
        dist = math.hypot(fx, fy)
        if dist > reach:
            fx, fy = fx * reach / dist, fy * reach / dist
            clamped = True
    return FootstepCommand(com_offset=(px - fx, py - fy), position=(fx - px, fy - py),
                           from_stance=(fx, fy), side=upcoming,
                           touchdown_time=touchdown_time, clamped=clamped)


def update_touchdown_during_swing(current_state: AlipState, params: GaitParams,
                                  time_remaining: float, stance_side: Side,
                                  reach: Optional[float] = None,
                                  omega: Optional[float] = None) -> FootstepCommand:
    """Re-plan the touchdown from the measured state mid-swing."""
    if not 0.0 <= time_remaining <= params.T:
        raise ValueError(f"time_remaining must lie in [0, T], got {time_remaining!r}")
    end = alip_propagate(current_state, params, time_remaining, omega)
    return desired_touchdown(end, params, stance_side, reach=reach,
                             touchdown_time=time_remaining, omega=omega)


def periodic_orbit(params: GaitParams, stance_side: Side,
                   omega: Optional[float] = None) -> AlipState:
    """Start-of-step state of the closed-loop limit cycle on the ideal plant.

    The sagittal axis is period one.  The lateral axis is a period-one drift
    from the lateral speed offset plus a period-two swing from the width
    offset, with the CoM on the inner side of the stance foot.
    """
    w, c, s = _cs(params, omega)
    h = 0.5 * w * params.T
    off = step_offsets(params, omega)
    mdz = params.m * params.dz
    gain = w * s / (1.0 - params.lam)
    vx0 = -off.xi_sp_x * gain
    vy0 = -off.xi_sp_y * gain
    x0 = -vx0 * math.tanh(h) / w
    y_drift = -vy0 * math.tanh(h) / w
    half_width = off.xi_sw * (c + 1.0) / (1.0 + params.lam)
    y_swing = -stance_side.sign * half_width
    v_swing = stance_side.sign * w * half_width * math.tanh(h)
    return AlipState(x0, y_drift + y_swing, -mdz * (vy0 + v_swing), mdz * vx0)
