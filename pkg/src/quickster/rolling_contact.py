"""Heel-to-toe CoP placement as a fraction of the CoM offset."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Tuple

from .alip import GaitParams


@dataclass(frozen=True)
class RollingContactParams:
    """Rolling-contact shape of the stance foot, expressed in the foot frame.

    ``alpha`` is the fraction of the CoM offset the CoP follows once the
    foot is flat.  Extents are measured from the ankle.
    """

    alpha: float = 0.6
    heel_extent: float = 0.08
    toe_extent: float = 0.14
    half_width: float = 0.04
    heel_hold_fraction: float = 0.1
    enabled: bool = False

    def __post_init__(self):
        if not 0 <= self.alpha < 1:
            raise ValueError(f"0 <= alpha < 1 required, got {self.alpha!r}")
        for name in ("heel_extent", "toe_extent", "half_width"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.heel_hold_fraction <= 1:
            raise ValueError("heel_hold_fraction must lie in [0, 1]")

    def replace(self, **changes) -> "RollingContactParams":
        return dataclasses.replace(self, **changes)


def _clamp(v: float, lo: float, hi: float) -> float:
    return lo if v < lo else hi if v > hi else v


def desired_cop(com_offset: Tuple[float, float], params: RollingContactParams,
                stance_progress: float) -> Tuple[float, float]:
    """CoP offset from the ankle, in the foot frame.

    The CoP sits on the heel until the heel-hold window ends, then tracks
    ``alpha`` times the CoM offset clamped to the sole.
    """
    if not params.enabled:
        return 0.0, 0.0
    if stance_progress < params.heel_hold_fraction:
        return -params.heel_extent, 0.0
    x, y = com_offset
    return (_clamp(params.alpha * x, -params.heel_extent, params.toe_extent),
            _clamp(params.alpha * y, -params.half_width, params.half_width))


def effective_frequency(params: GaitParams, rc: RollingContactParams) -> float:
    """Pendulum frequency seen under un-clamped rolling contact.

    Equivalent to a pendulum of height ``dz / (1 - alpha)``.
    """
    if not rc.alpha < 1:
        raise ValueError("alpha must be below 1")
    if not rc.enabled:
        return params.omega
    return params.omega * math.sqrt(1.0 - rc.alpha)
