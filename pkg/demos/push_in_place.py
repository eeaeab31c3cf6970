"""Stepping in place, push sideways mid-step and print how fast the error decays.

Run:  python demos/push_in_place.py [impulse_kg_m2_per_s]
"""
import math
import sys

from quickster.metrics import orbit_distance
from quickster.simulator import FallEvent, SimConfig, run_scenario, with_push

impulse = float(sys.argv[1]) if len(sys.argv) > 1 else 15.0
base = SimConfig(n_steps=14)
reference, _ = run_scenario(base)
try:
    records, _ = run_scenario(with_push(base, math.pi / 2, impulse, push_step=6))
except FallEvent as exc:
    sys.exit(f"fell: {exc}")
for rec, ref in zip(records[6:], reference[6:]):
    print(f"step {rec.step_index:>2}: {100 * orbit_distance(rec, ref, base.gait.omega):7.3f}% "
          "off the unpushed orbit")
