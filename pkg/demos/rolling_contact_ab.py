"""Compare CoM work per stride with a point foot and with heel-to-toe rolling.

Run:  python demos/rolling_contact_ab.py
"""
from quickster.alip import GaitParams
from quickster.cli import ab_rolling
from quickster.config import RunConfig
from quickster.simulator import SimConfig

run = RunConfig(sim=SimConfig(gait=GaitParams(v_d=(0.7, 0.0)), n_steps=30))
res = ab_rolling(run)
for key in ("positive_work", "negative_work"):
    print(f"{key:>14}: point foot {res['off'][key]:7.3f} J, rolling {res['on'][key]:7.3f} J, "
          f"reduction {res['reduction_percent'][key]:5.1f}%")
print(f"mean speed: point foot {res['off']['mean_forward_velocity']:.3f} m/s, "
      f"rolling {res['on']['mean_forward_velocity']:.3f} m/s")
