"""Linear inverted pendulum dynamics with contact-point angular momentum (ALIP).

Sign convention used throughout the package::

    x_dot =  Ly / (m * dz)
    y_dot = -Lx / (m * dz)

so a positive ``Ly`` carries the CoM forward (+x) and a positive ``Lx``
carries it toward -y.  The lateral pair therefore evolves as ``(y, -Lx)``
under the same 2x2 transition as the sagittal pair ``(x, Ly)``.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np


@dataclass(frozen=True)
class GaitParams:
    """Physical and gait constants shared by the planner and the plant.

    Attributes:
        m: total mass [kg]
        g: gravitational acceleration [m/s^2]
        dz: nominal pendulum height [m]
        T: step duration [s]
        lam: desired closed-loop step-to-step eigenvalue
        mu: desired step width [m]
        v_d: commanded planar velocity (forward, lateral) [m/s]
    """

    m: float = 80.0
    g: float = 9.81
    dz: float = 1.06
    T: float = 0.4
    lam: float = 0.3
    mu: float = 0.25
    v_d: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "v_d", tuple(float(v) for v in self.v_d))
        if len(self.v_d) != 2:
            raise ValueError("v_d must have two components")
        for name in ("m", "g", "dz", "T"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if not abs(self.lam) < 1:
            raise ValueError(f"|lambda| < 1 required, got {self.lam!r}")
        if not self.mu >= 0:
            raise ValueError(f"mu >= 0 required, got {self.mu!r}")

    @property
    def omega(self) -> float:
        return natural_frequency(self)

    def replace(self, **changes) -> "GaitParams":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class AlipState:
    """CoM offset from the stance contact point and angular momentum about it."""

    x: float = 0.0
    y: float = 0.0
    Lx: float = 0.0
    Ly: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.Lx, self.Ly])

    @classmethod
    def from_array(cls, arr: Sequence[float]) -> "AlipState":
        x, y, Lx, Ly = (float(v) for v in arr)
        return cls(x, y, Lx, Ly)

    def velocity(self, m: float, dz: float) -> Tuple[float, float]:
        """CoM planar velocity implied by the momentum at height ``dz``."""
        return self.Ly / (m * dz), -self.Lx / (m * dz)

    @classmethod
    def from_velocity(cls, x: float, y: float, vx: float, vy: float,
                      m: float, dz: float) -> "AlipState":
        return cls(x, y, -m * dz * vy, m * dz * vx)


def natural_frequency(params: GaitParams) -> float:
    """Return sqrt(g / dz)."""
    if not (params.dz > 0 and params.g > 0):
        raise ValueError("natural frequency needs dz > 0 and g > 0")
    return math.sqrt(params.g / params.dz)


def _check_dt(dt: float) -> None:
    if not dt >= 0:
        raise ValueError(f"duration must be non-negative, got {dt!r}")


def alip_transition(params: GaitParams, dt: float,
                    omega: Optional[float] = None) -> np.ndarray:
    """Closed-form map of ``(x, Ly)`` over ``dt`` seconds.

    ``omega`` overrides the natural frequency while keeping ``m * dz`` as
    the momentum scale; this is the flow of the rolling-contact field
    ``dLy/dt = m g (1 - alpha) x`` when ``omega = w * sqrt(1 - alpha)``.
    """
    _check_dt(dt)
    w = params.omega if omega is None else omega
    mdz = params.m * params.dz
    c, s = math.cosh(w * dt), math.sinh(w * dt)
    return np.array([[c, s / (mdz * w)],
                     [mdz * w * s, c]])


def lip_transition(params: GaitParams, dt: float,
                   omega: Optional[float] = None) -> np.ndarray:
    """Closed-form map of ``(x, x_dot)`` over ``dt`` seconds."""
    _check_dt(dt)
    w = params.omega if omega is None else omega
    c, s = math.cosh(w * dt), math.sinh(w * dt)
    return np.array([[c, s / w],
                     [w * s, c]])


def alip_propagate(state: AlipState, params: GaitParams, dt: float,
                   omega: Optional[float] = None) -> AlipState:
    """Advance both planar axes of ``state`` by ``dt`` with zero CoP."""
    A = alip_transition(params, dt, omega)
    x, Ly = A @ (state.x, state.Ly)
    y, neg_Lx = A @ (state.y, -state.Lx)
    return AlipState(float(x), float(y), float(-neg_Lx), float(Ly))


def vector_field(x: float, y: float, Lx: float, Ly: float, m: float, g: float,
                 dz: float, cop_x: float = 0.0, cop_y: float = 0.0):
    """Scalar form of :func:`alip_vector_field`; returns a 4-tuple."""
    mdz = m * dz
    return (Ly / mdz, -Lx / mdz, -m * g * (y - cop_y), m * g * (x - cop_x))


def alip_vector_field(state: AlipState, params: GaitParams,
                      cop_offset: Sequence[float] = (0.0, 0.0),
                      dz: Optional[float] = None) -> np.ndarray:
    """Time derivative ``(x_dot, y_dot, Lx_dot, Ly_dot)`` with a CoP offset.

    The CoP moment arm form ``dLy/dt = m g (x - cop_x)`` reduces to the
    point-foot dynamics at zero CoP.  ``dz`` overrides the height used to
    recover velocity from momentum.
    """
    h = params.dz if dz is None else dz
    return np.array(vector_field(state.x, state.y, state.Lx, state.Ly,
                                 params.m, params.g, h,
                                 float(cop_offset[0]), float(cop_offset[1])))


def reexpress(state: AlipState, shift: Sequence[float], m: float,
              height_before: float, height_after: float,
              recompute: bool = True) -> AlipState:
    """Express ``state`` about a contact point moved by ``shift`` (dx, dy).

    With ``recompute`` the CoM velocity is carried across and momentum is
    rebuilt at the new pendulum height; otherwise momentum is carried raw.
    On level ground both options agree.
    """
    dx, dy = shift
    scale = height_after / height_before if recompute else 1.0
    return AlipState(state.x - dx, state.y - dy, state.Lx * scale, state.Ly * scale)
