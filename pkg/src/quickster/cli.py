"""Command-line front end: run, sweep, ab-rolling, push-grid.

Exit codes: 0 success, 2 config error, 3 fall, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import platform
import sys
import time
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from . import __version__
from .config import (ConfigError, RunConfig, config_hash, load_config, serialize,
                     with_overrides)
from .metrics import (StrideRecord, aggregate, orbit_distance, percent_reduction,
                      stride_metrics)
from .simulator import (FallEvent, SimConfig, max_recoverable_impulse, run_scenario,
                        with_push)

log = logging.getLogger("quickster")

EXIT_OK, EXIT_CONFIG, EXIT_FALL, EXIT_IO = 0, 2, 3, 4
CSV_SCHEMA_VERSION = 1
REFERENCE_REDUCTION = {"negative_work": 11.0, "positive_work": 21.0}

TRAJECTORY_COLUMNS = (
    "step", "stance_side", "t", "com_x", "com_y", "com_z", "com_vx", "com_vy", "com_vz",
    "offset_x", "offset_y", "cop_x", "cop_y", "leg_length", "height", "height_accel",
    "swing_x", "swing_y", "swing_z", "heading")
STRIDE_COLUMNS = (
    "step", "stance_side", "t_start", "duration", "positive_work", "negative_work",
    "avg_forward_velocity", "avg_lateral_velocity", "step_length", "step_width",
    "max_abs_height_accel", "cop_travel", "events")


def fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def trajectory_rows(records: Sequence[StrideRecord]):
    for r in records:
        for k in range(len(r.t)):
            yield (r.step_index, r.stance_side, r.t[k], *r.com_position[k], *r.com_velocity[k],
                   *r.com_offset[k], *r.cop_offset[k], r.leg_length[k], r.height[k],
                   r.height_accel[k], *r.swing_foot[k], r.heading)


def stride_rows(records: Sequence[StrideRecord], run: RunConfig):
    for r in records:
        m = stride_metrics(r, run.sim.gait, run.analysis.include_lateral_work)
        yield (r.step_index, r.stance_side, r.t[0], r.duration, m.positive_work,
               m.negative_work, m.avg_forward_velocity, m.avg_lateral_velocity,
               m.step_length, m.step_width, m.max_abs_height_accel, m.cop_travel,
               ";".join(r.events))


def _steady(records: Sequence[StrideRecord], run: RunConfig) -> Sequence[StrideRecord]:
    warm = min(run.analysis.warmup_steps, max(len(records) - 1, 0))
    return records[warm:]


def _median_summary(records: Sequence[StrideRecord], run: RunConfig) -> Dict[str, float]:
    summary = aggregate(_steady(records, run), run.sim.gait, run.analysis.include_lateral_work)
    med = summary.median_stride
    out = {f.name: getattr(med, f.name) for f in dataclasses.fields(med)}
    out["median_step"] = summary.step_indices[summary.median_index]
    out["mean_forward_velocity"] = summary.mean["avg_forward_velocity"]
    return out


def _manifest(path: Path, run: RunConfig, command: str, outputs: Dict[str, str],
              started: float, extra: Optional[dict] = None) -> None:
    data = {
        "command": command,
        "artifact_version": __version__,
        "config_hash": config_hash(run),
        "scenario": run.sim.scenario.name,
        "seed": run.sim.seed,
        "csv_schema_version": CSV_SCHEMA_VERSION,
        "outputs": outputs,
        "wall_clock_s": time.time() - started,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "work_note": "CoM forward kinetic-energy work, a proxy for joint mechanical work",
    }
    data.update(extra or {})
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fall_info(fall: FallEvent) -> dict:
    return {"step_index": fall.step_index, "time": fall.time, "reason": fall.reason,
            "diagnostics": {k: (float(v) if isinstance(v, (int, float)) else str(v))
                            for k, v in fall.diagnostics.items()}}


def cmd_run(run: RunConfig, out: Path) -> int:
    started = time.time()
    out.mkdir(parents=True, exist_ok=True)
    fall = None
    try:
        records, events = run_scenario(run.sim)
    except FallEvent as exc:
        fall, records, events = exc, exc.records, exc.events
    files = {"trajectory": "trajectory.csv", "strides": "strides.csv",
             "manifest": "manifest.json", "config": "config.yaml"}
    _write_csv(out / files["trajectory"], TRAJECTORY_COLUMNS, trajectory_rows(records))
    _write_csv(out / files["strides"], STRIDE_COLUMNS, stride_rows(records, run))
    (out / files["config"]).write_text(serialize(run), encoding="utf-8")
    extra = {"status": "fall" if fall else "ok", "steps_completed": len(records),
             "events": events}
    if fall is not None:
        extra["fall"] = _fall_info(fall)
    elif records:
        extra["median_stride"] = _median_summary(records, run)
    _manifest(out / files["manifest"], run, "run", files, started, extra)
    if fall is not None:
        print(f"fall at step {fall.step_index}: {fall.reason}", file=sys.stderr)
        return EXIT_FALL
    return EXIT_OK


def _sweep_row(args):
    run, speed = args
    cfg = run.sim.replace(gait=run.sim.gait.replace(v_d=(speed, run.sim.gait.v_d[1])))
    try:
        records, _ = run_scenario(cfg)
    except FallEvent as exc:
        return {"speed": speed, "status": "fall", "fall_step": exc.step_index}
    summary = _median_summary(records, dataclasses.replace(run, sim=cfg))
    summary.update(speed=speed, status="ok",
                   speed_ratio=summary["mean_forward_velocity"] / speed if speed else math.nan)
    return summary


SWEEP_COLUMNS = ("speed", "status", "speed_ratio", "mean_forward_velocity", "median_step",
                 "positive_work", "negative_work", "avg_forward_velocity",
                 "avg_lateral_velocity", "step_length", "step_width",
                 "max_abs_height_accel", "cop_travel", "fall_step")


def cmd_sweep(run: RunConfig, speeds: Sequence[float], out: Path, jobs: int = 1) -> int:
    if not speeds:
        raise ConfigError("sweep needs at least one speed")
    started = time.time()
    out.mkdir(parents=True, exist_ok=True)
    tasks = [(run, float(v)) for v in speeds]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_row, tasks))
    else:
        rows = [_sweep_row(t) for t in tasks]
    _write_csv(out / "sweep.csv", SWEEP_COLUMNS,
               ([row.get(c, "") for c in SWEEP_COLUMNS] for row in rows))
    failed = [r["speed"] for r in rows if r["status"] != "ok"]
    _manifest(out / "manifest.json", run, "sweep",
              {"sweep": "sweep.csv", "manifest": "manifest.json"}, started,
              {"speeds": list(map(float, speeds)), "failed_speeds": failed})
    for row in rows:
        print(f"v={row['speed']:.3g} {row['status']}"
              + (f" ratio={row['speed_ratio']:.4f}" if row["status"] == "ok" else ""))
    return EXIT_OK


def ab_rolling(run: RunConfig) -> Dict[str, Dict[str, float]]:
    """Median-stride work with rolling contact off and on, same scenario and seed."""
    result = {}
    for label, enabled in (("off", False), ("on", True)):
        cfg = run.sim.replace(rolling=run.sim.rolling.replace(enabled=enabled))
        records, _ = run_scenario(cfg)
        result[label] = _median_summary(records, dataclasses.replace(run, sim=cfg))
    result["reduction_percent"] = {
        key: percent_reduction(result["off"][key], result["on"][key])
        for key in ("positive_work", "negative_work")}
    return result


def cmd_ab_rolling(run: RunConfig, out: Path) -> int:
    started = time.time()
    out.mkdir(parents=True, exist_ok=True)
    try:
        res = ab_rolling(run)
    except FallEvent as exc:
        print(f"fall at step {exc.step_index}: {exc.reason}", file=sys.stderr)
        _manifest(out / "manifest.json", run, "ab-rolling", {"manifest": "manifest.json"},
                  started, {"status": "fall", "fall": _fall_info(exc)})
        return EXIT_FALL
    rows = []
    for key in ("positive_work", "negative_work"):
        rows.append((key, res["off"][key], res["on"][key], res["reduction_percent"][key],
                     REFERENCE_REDUCTION[key]))
    _write_csv(out / "ab_rolling.csv",
               ("metric", "rolling_off", "rolling_on", "reduction_percent",
                "reference_reduction_percent"), rows)
    _manifest(out / "manifest.json", run, "ab-rolling",
              {"ab_rolling": "ab_rolling.csv", "manifest": "manifest.json"}, started,
              {"status": "ok", "result": res})
    for key, off, on, red, ref in rows:
        print(f"{key}: off={off:.4f} J on={on:.4f} J reduction={red:.1f}% (reference {ref:.0f}%)")
    return EXIT_OK


def push_grid(run: RunConfig, n_directions: int = 8, push_step: int = 6,
              fraction: float = 0.5, settle_steps: int = 4, tol: float = 1.0):
    """Recoverable impulse per direction and the recovery at ``fraction`` of it.

    Recovery error is the start-of-stride distance from the unpushed run
    after ``settle_steps`` complete steps following the pushed step.
    """
    n_steps = max(run.sim.n_steps, push_step + settle_steps + 2)
    cfg = run.sim.replace(n_steps=n_steps)
    reference, _ = run_scenario(cfg)
    omega = cfg.gait.omega
    check = push_step + settle_steps + 1
    rows = []
    for k in range(n_directions):
        direction = 2 * math.pi * k / n_directions
        bound = max_recoverable_impulse(cfg, direction, push_step, tol=tol)
        try:
            records, _ = run_scenario(with_push(cfg, direction, fraction * bound, push_step))
            err = orbit_distance(records[check], reference[check], omega)
        except FallEvent:
            err = math.inf
        rows.append({"direction_deg": math.degrees(direction), "max_impulse": bound,
                     "test_impulse": fraction * bound, "recovery_error": err})
    return rows


def cmd_push_grid(run: RunConfig, out: Path, n_directions: int, push_step: int,
                  tol: float) -> int:
    started = time.time()
    out.mkdir(parents=True, exist_ok=True)
    rows = push_grid(run, n_directions, push_step, tol=tol)
    cols = ("direction_deg", "max_impulse", "test_impulse", "recovery_error")
    _write_csv(out / "push_grid.csv", cols, ([r[c] for c in cols] for r in rows))
    _manifest(out / "manifest.json", run, "push-grid",
              {"push_grid": "push_grid.csv", "manifest": "manifest.json"}, started)
    for r in rows:
        print(f"{r['direction_deg']:6.1f} deg: bound={r['max_impulse']:.2f} kg m^2/s "
              f"recovery_error={r['recovery_error']:.4g}")
    return EXIT_OK


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on or off")
    return text == "on"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quickster",
                                     description="ALIP step-adjustment walking simulation")
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat dotted-key YAML document")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--rolling", type=_on_off, metavar="on|off")
    common.add_argument("--lambda", dest="lam", type=float)
    common.add_argument("--speed", type=float, help="forward speed command [m/s]")
    common.add_argument("--steps", type=int, help="number of steps")
    common.add_argument("--lenient", action="store_true", help="warn on unknown keys")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="simulate one scenario")
    sw = sub.add_parser("sweep", parents=[common], help="median-stride metrics per speed")
    sw.add_argument("--speeds", type=float, nargs="*", default=[0.3, 0.5, 0.7])
    sw.add_argument("--jobs", type=int, default=1)
    sub.add_parser("ab-rolling", parents=[common], help="rolling contact off vs on")
    pg = sub.add_parser("push-grid", parents=[common], help="recoverable impulse per direction")
    pg.add_argument("--directions", type=int, default=8)
    pg.add_argument("--push-step", type=int, default=6)
    pg.add_argument("--tol", type=float, default=1.0, help="bisection tolerance [kg m^2/s]")
    return parser


def _resolve(args) -> RunConfig:
    text = args.config.read_text(encoding="utf-8") if args.config else ""
    run = load_config(text, strict=not args.lenient)
    sim: SimConfig = run.sim
    gait = sim.gait
    try:
        if args.lam is not None:
            gait = gait.replace(lam=args.lam)
        if args.speed is not None:
            gait = gait.replace(v_d=(args.speed, gait.v_d[1]))
        changes = {"gait": gait}
        if args.seed is not None:
            changes["seed"] = args.seed
        if args.steps is not None:
            changes["n_steps"] = args.steps
        if args.rolling is not None:
            changes["rolling"] = sim.rolling.replace(enabled=args.rolling)
        return with_overrides(run, **changes)
    except ValueError as exc:
        raise ConfigError(f"command-line override: {exc}") from None


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        run = _resolve(args)
        if args.command == "run":
            return cmd_run(run, args.out)
        if args.command == "sweep":
            return cmd_sweep(run, args.speeds, args.out, args.jobs)
        if args.command == "ab-rolling":
            return cmd_ab_rolling(run, args.out)
        return cmd_push_grid(run, args.out, args.directions, args.push_step, args.tol)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        name = getattr(exc, "filename", None)
        print(f"I/O error{f' ({name})' if name else ''}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
