"""Walk at 0.7 m/s, step blindly off a 5 cm ledge, and watch the gait settle.

Run:  python demos/walk_and_drop.py
"""
from quickster.alip import GaitParams
from quickster.metrics import orbit_distance, stride_metrics
from quickster.simulator import ScenarioSpec, SimConfig, run_scenario

base = SimConfig(gait=GaitParams(v_d=(0.7, 0.0)), n_steps=16)
reference, _ = run_scenario(base)
dropped = base.replace(scenario=ScenarioSpec(name="ledge", terrain_drops=((6, 0.05),)))
records, events = run_scenario(dropped)

print("events:", *events, sep="\n  ")
print(f"\n{'step':>4} {'duration':>8} {'speed':>6} {'ground':>7} {'off orbit':>9}")
for rec, ref in zip(records, reference):
    m = stride_metrics(rec, base.gait)
    dist = orbit_distance(rec, ref, base.gait.omega)
    print(f"{rec.step_index:>4} {rec.duration:>8.3f} {m.avg_forward_velocity:>6.3f} "
          f"{rec.stance_foot[2]:>7.3f} {100 * dist:>8.2f}%")
