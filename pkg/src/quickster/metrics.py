"""Per-stride CoM energetics and gait-quality metrics.

Work here is CoM forward kinetic-energy work, a reduced-order proxy for
joint mechanical power; it is not joint power.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .alip import GaitParams


@dataclass
class StrideRecord:
    """Samples of one step, touchdown to touchdown, at the control rate.

    Array fields share the leading sample axis.  ``com_offset`` and
    ``cop_offset`` are relative to the stance ankle in world axes;
    ``heading`` defines the forward direction.
    """

    t: np.ndarray
    com_offset: np.ndarray
    com_position: np.ndarray
    com_velocity: np.ndarray
    cop_offset: np.ndarray
    leg_length: np.ndarray
    height: np.ndarray
    height_accel: np.ndarray
    step_index: int = 0
    stance_side: str = "left"
    stance_foot: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    next_foot: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    heading: float = 0.0
    events: List[str] = field(default_factory=list)
    swing_foot: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.swing_foot is None:
            self.swing_foot = np.full((len(self.t), 3), np.nan)
        n = len(self.t)
        for name in ("com_offset", "com_position", "com_velocity", "cop_offset",
                     "leg_length", "height", "height_accel", "swing_foot"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} has {len(getattr(self, name))} samples, expected {n}")
        if n > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("sample times must be strictly increasing")

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    def _axes(self) -> Tuple[np.ndarray, np.ndarray]:
        c, s = np.cos(self.heading), np.sin(self.heading)
        return np.array([c, s]), np.array([-s, c])

    def forward_velocity(self) -> np.ndarray:
        fwd, _ = self._axes()
        return self.com_velocity[:, :2] @ fwd

    def lateral_velocity(self) -> np.ndarray:
        _, lat = self._axes()
        return self.com_velocity[:, :2] @ lat

    def cop_forward(self) -> np.ndarray:
        fwd, _ = self._axes()
        return self.cop_offset @ fwd


@dataclass(frozen=True)
class StrideMetrics:
    positive_work: float
    negative_work: float
    avg_forward_velocity: float
    avg_lateral_velocity: float
    step_length: float
    step_width: float
    max_abs_height_accel: float
    cop_travel: float

    @property
    def total_work(self) -> float:
        return self.positive_work - self.negative_work


def _kinetic_energy(record: StrideRecord, params: GaitParams,
                    include_lateral: bool) -> np.ndarray:
    v = record.forward_velocity()
    ke = 0.5 * params.m * v * v
    if include_lateral:
        vl = record.lateral_velocity()
        ke = ke + 0.5 * params.m * vl * vl
    return ke


def energy_rate_series(record: StrideRecord, params: GaitParams,
                       include_lateral: bool = False) -> np.ndarray:
    """Rate of change of the CoM forward kinetic energy [W].

    Central differences inside, one-sided first differences at the ends, so
    the trapezoidal integral of the series telescopes to the net change.
    """
    if len(record.t) < 3:
        raise ValueError("energy rate needs at least 3 samples")
    ke = _kinetic_energy(record, params, include_lateral)
    return np.gradient(ke, record.t, edge_order=1)


def _trapezoid(y: np.ndarray, t: np.ndarray) -> float:
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(t)))


def stride_work(record: StrideRecord, params: GaitParams,
                include_lateral: bool = False) -> Tuple[float, float]:
    """(positive_work, negative_work) over the stride [J]."""
    rate = energy_rate_series(record, params, include_lateral)
    return (_trapezoid(np.maximum(rate, 0.0), record.t),
            _trapezoid(np.minimum(rate, 0.0), record.t))


def net_kinetic_energy_change(record: StrideRecord, params: GaitParams,
                              include_lateral: bool = False) -> float:
    ke = _kinetic_energy(record, params, include_lateral)
    return float(ke[-1] - ke[0])


def stride_metrics(record: StrideRecord, params: GaitParams,
                   include_lateral: bool = False) -> StrideMetrics:
    pos, neg = stride_work(record, params, include_lateral)
    fwd, lat = record._axes()
    disp = record.com_position[-1, :2] - record.com_position[0, :2]
    step = np.asarray(record.next_foot[:2]) - np.asarray(record.stance_foot[:2])
    dur = record.duration
    cop = record.cop_forward()
    return StrideMetrics(
        positive_work=pos,
        negative_work=neg,
        avg_forward_velocity=float(disp @ fwd) / dur,
        avg_lateral_velocity=float(disp @ lat) / dur,
        step_length=float(step @ fwd),
        step_width=abs(float(step @ lat)),
        max_abs_height_accel=float(np.max(np.abs(record.height_accel))),
        cop_travel=float(cop.max() - cop.min()),
    )


@dataclass
class Summary:
    """Aggregate over strides; ``median`` is the stride at the median total work."""

    rows: List[StrideMetrics]
    step_indices: List[int]
    median_index: int
    mean: Dict[str, float]
    median: Dict[str, float]
    std: Dict[str, float]

    @property
    def median_stride(self) -> StrideMetrics:
        return self.rows[self.median_index]


_FIELDS = ("positive_work", "negative_work", "avg_forward_velocity",
           "avg_lateral_velocity", "step_length", "step_width",
           "max_abs_height_accel", "cop_travel")


def aggregate(records: Sequence[StrideRecord], params: GaitParams,
              include_lateral: bool = False) -> Summary:
    if not records:
        raise ValueError("aggregate needs at least one stride")
    rows = [stride_metrics(r, params, include_lateral) for r in records]
    total = np.array([r.total_work for r in rows])
    order = np.argsort(total, kind="stable")
    median_index = int(order[(len(rows) - 1) // 2])
    table = {f: np.array([getattr(r, f) for r in rows]) for f in _FIELDS}
    return Summary(
        rows=rows,
        step_indices=[r.step_index for r in records],
        median_index=median_index,
        mean={f: float(v.mean()) for f, v in table.items()},
        median={f: float(np.median(v)) for f, v in table.items()},
        std={f: float(v.std()) for f, v in table.items()},
    )


def percent_reduction(baseline: float, treated: float) -> float:
    """Reduction of ``|treated|`` relative to ``|baseline|`` in percent."""
    if baseline == 0:
        return 0.0
    return 100.0 * (abs(baseline) - abs(treated)) / abs(baseline)


def touchdown_state(record: StrideRecord, omega: float) -> np.ndarray:
    """``(x, y, vx/omega, vy/omega)`` at the start of the stride, heading frame."""
    fwd, lat = record._axes()
    off = record.com_offset[0]
    vel = record.com_velocity[0, :2]
    return np.array([off @ fwd, off @ lat, (vel @ fwd) / omega, (vel @ lat) / omega])


def orbit_distance(record: StrideRecord, reference: StrideRecord, omega: float) -> float:
    """Start-of-stride deviation from ``reference``, relative to its state norm.

    Positions and velocities share units through the pendulum frequency.
    """
    ref = touchdown_state(reference, omega)
    return float(np.linalg.norm(touchdown_state(record, omega) - ref) / np.linalg.norm(ref))
