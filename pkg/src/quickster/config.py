"""Flat dotted-key configuration documents.

A document is a YAML mapping whose keys name one field each, for example::

    gait.lambda: 0.3
    gait.v_d: [0.7, 0.0]
    rolling.enabled: true
    scenario.pushes: [[2.6, 0.0, 40.0]]

Bare field names (``lambda``) are accepted when they are unambiguous.
"""
from __future__ import annotations

import dataclasses
import hashlib
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Tuple

import yaml

from .alip import GaitParams
from .leg_length import LegLengthParams
from .rolling_contact import RollingContactParams
from .simulator import (HEIGHT_MODES, MOMENTUM_TRANSFERS, PLANNER_FREQUENCIES,
                        ScenarioSpec, SimConfig)

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass(frozen=True)
class AnalysisOptions:
    warmup_steps: int = 10
    include_lateral_work: bool = False


@dataclass(frozen=True)
class RunConfig:
    sim: SimConfig = field(default_factory=SimConfig)
    analysis: AnalysisOptions = field(default_factory=AnalysisOptions)


def _float(v: Any) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise TypeError(f"expected a number, got {v!r}")
    return float(v)


def _int(v: Any) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise TypeError(f"expected an integer, got {v!r}")
    return v


def _bool(v: Any) -> bool:
    if not isinstance(v, bool):
        raise TypeError(f"expected true or false, got {v!r}")
    return v


def _str(v: Any) -> str:
    if not isinstance(v, str):
        raise TypeError(f"expected a string, got {v!r}")
    return v


def _choice(options: Tuple[str, ...]) -> Callable[[Any], str]:
    def conv(v: Any) -> str:
        if v not in options:
            raise TypeError(f"expected one of {list(options)}, got {v!r}")
        return v
    return conv


def _vector(n: int) -> Callable[[Any], Tuple[float, ...]]:
    def conv(v: Any) -> Tuple[float, ...]:
        if not isinstance(v, (list, tuple)) or len(v) != n:
            raise TypeError(f"expected a list of {n} numbers, got {v!r}")
        return tuple(_float(e) for e in v)
    return conv


def _rows(n: int, first_int: bool = False) -> Callable[[Any], Tuple[tuple, ...]]:
    def conv(v: Any) -> Tuple[tuple, ...]:
        if not isinstance(v, (list, tuple)):
            raise TypeError(f"expected a list of rows, got {v!r}")
        out = []
        for row in v:
            if not isinstance(row, (list, tuple)) or len(row) != n:
                raise TypeError(f"expected rows of {n} values, got {row!r}")
            if first_int:
                out.append((_int(row[0]),) + tuple(_float(e) for e in row[1:]))
            else:
                out.append(tuple(_float(e) for e in row))
        return tuple(out)
    return conv


# key -> (section, attribute, converter)
_SCHEMA: Dict[str, Tuple[str, str, Callable[[Any], Any]]] = {
    "gait.m": ("gait", "m", _float),
    "gait.g": ("gait", "g", _float),
    "gait.dz": ("gait", "dz", _float),
    "gait.T": ("gait", "T", _float),
    "gait.lambda": ("gait", "lam", _float),
    "gait.mu": ("gait", "mu", _float),
    "gait.v_d": ("gait", "v_d", _vector(2)),
    "leg.l0": ("leg", "l0", _float),
    "leg.l_max": ("leg", "l_max", _float),
    "leg.a_str": ("leg", "a_str", _float),
    "leg.a_cl": ("leg", "a_cl", _float),
    "leg.a_search": ("leg", "a_search", _float),
    "leg.beta": ("leg", "beta", _float),
    "leg.d_trigger": ("leg", "d_trigger", _float),
    "leg.floor_fraction": ("leg", "floor_fraction", _float),
    "leg.min_height": ("leg", "min_height", _float),
    "rolling.alpha": ("rolling", "alpha", _float),
    "rolling.heel_extent": ("rolling", "heel_extent", _float),
    "rolling.toe_extent": ("rolling", "toe_extent", _float),
    "rolling.half_width": ("rolling", "half_width", _float),
    "rolling.heel_hold_fraction": ("rolling", "heel_hold_fraction", _float),
    "rolling.enabled": ("rolling", "enabled", _bool),
    "sim.integrator_dt": ("sim", "integrator_dt", _float),
    "sim.control_dt": ("sim", "control_dt", _float),
    "sim.n_steps": ("sim", "n_steps", _int),
    "sim.seed": ("sim", "seed", _int),
    "sim.height_mode": ("sim", "height_mode", _choice(HEIGHT_MODES)),
    "sim.momentum_transfer": ("sim", "momentum_transfer", _choice(MOMENTUM_TRANSFERS)),
    "sim.planner_frequency": ("sim", "planner_frequency", _choice(PLANNER_FREQUENCIES)),
    "sim.reach_fraction": ("sim", "reach_fraction", _float),
    "sim.swing_clearance": ("sim", "swing_clearance", _float),
    "sim.max_step_extension": ("sim", "max_step_extension", _float),
    "sim.max_height_projection": ("sim", "max_height_projection", _float),
    "sim.fall_samples": ("sim", "fall_samples", _int),
    "scenario.name": ("scenario", "name", _str),
    "scenario.velocity_profile": ("scenario", "velocity_profile", _rows(4)),
    "scenario.pushes": ("scenario", "pushes", _rows(3)),
    "scenario.terrain_drops": ("scenario", "terrain_drops", _rows(2, first_int=True)),
    "scenario.push_jitter": ("scenario", "push_jitter", _float),
    "analysis.warmup_steps": ("analysis", "warmup_steps", _int),
    "analysis.include_lateral_work": ("analysis", "include_lateral_work", _bool),
}


def _aliases() -> Dict[str, str]:
    counts: Dict[str, List[str]] = {}
    for key in _SCHEMA:
        counts.setdefault(key.split(".", 1)[1], []).append(key)
    return {bare: keys[0] for bare, keys in counts.items() if len(keys) == 1}


_ALIASES = _aliases()
_KEY_OF = {(section, attr): key for key, (section, attr, _) in _SCHEMA.items()}


def _build(section: str, cls, values: Dict[str, Any]):
    try:
        return cls(**values)
    except (ValueError, TypeError) as exc:
        keys = ", ".join(sorted(_KEY_OF.get((section, k), f"{section}.{k}") for k in values
                                if (section, k) in _KEY_OF)) or "defaults only"
        raise ConfigError(f"{section}: {exc} (fields set: {keys})") from None


def load_config(text: str, strict: bool = True) -> RunConfig:
    """Parse a document into a run configuration.

    Raises:
        ConfigError: malformed document, unknown key (strict), wrong type,
            or a violated parameter constraint.
    """
    try:
        doc = yaml.safe_load(text) if text.strip() else {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed document: {exc}") from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("document must be a mapping of dotted keys to values")
    sections: Dict[str, Dict[str, Any]] = {s: {} for s in
                                           ("gait", "leg", "rolling", "sim", "scenario", "analysis")}
    for raw_key, value in doc.items():
        key = str(raw_key)
        key = _ALIASES.get(key, key)
        if key not in _SCHEMA:
            if strict:
                raise ConfigError(f"unknown key {raw_key!r}")
            log.warning("ignoring unknown config key %r", raw_key)
            continue
        section, attr, conv = _SCHEMA[key]
        try:
            sections[section][attr] = conv(value)
        except TypeError as exc:
            raise ConfigError(f"{key}: {exc}") from None
        if isinstance(sections[section][attr], float) and not math.isfinite(sections[section][attr]):
            raise ConfigError(f"{key}: value must be finite")
    gait = _build("gait", GaitParams, sections["gait"])
    leg = _build("leg", LegLengthParams, sections["leg"])
    rolling = _build("rolling", RollingContactParams, sections["rolling"])
    scenario = _build("scenario", ScenarioSpec, sections["scenario"])
    sim = _build("sim", SimConfig, dict(sections["sim"], gait=gait, leg=leg,
                                        rolling=rolling, scenario=scenario))
    analysis = _build("analysis", AnalysisOptions, sections["analysis"])
    if analysis.warmup_steps < 0:
        raise ConfigError("analysis.warmup_steps must be non-negative")
    return RunConfig(sim=sim, analysis=analysis)


def parse_config(text: str, strict: bool = True) -> SimConfig:
    return load_config(text, strict).sim


def _plain(v: Any) -> Any:
    if isinstance(v, tuple):
        return [_plain(e) for e in v]
    return v


def to_mapping(run: RunConfig) -> Dict[str, Any]:
    """Every schema key with its value, in schema order."""
    objs = {"gait": run.sim.gait, "leg": run.sim.leg, "rolling": run.sim.rolling,
            "sim": run.sim, "scenario": run.sim.scenario, "analysis": run.analysis}
    return {key: _plain(getattr(objs[section], attr))
            for key, (section, attr, _) in _SCHEMA.items()}


class _Dumper(yaml.SafeDumper):
    pass


def _repr_float(dumper, value: float):
    # repr round-trips exactly; YAML needs a dot or exponent to keep the type.
    text = repr(value)
    if text in ("inf", "-inf", "nan"):
        text = {"inf": ".inf", "-inf": "-.inf", "nan": ".nan"}[text]
    elif "." not in text and "e" not in text:
        text += ".0"
    return dumper.represent_scalar("tag:yaml.org,2002:float", text)


_Dumper.add_representer(float, _repr_float)


def serialize(config) -> str:
    """Canonical document for a :class:`RunConfig` or :class:`SimConfig`."""
    run = config if isinstance(config, RunConfig) else RunConfig(sim=config)
    return yaml.dump(to_mapping(run), Dumper=_Dumper, sort_keys=False,
                     default_flow_style=None, allow_unicode=True)


def config_hash(config) -> str:
    return hashlib.sha256(serialize(config).encode("utf-8")).hexdigest()


def with_overrides(run: RunConfig, **sim_changes) -> RunConfig:
    return dataclasses.replace(run, sim=run.sim.replace(**sim_changes))
