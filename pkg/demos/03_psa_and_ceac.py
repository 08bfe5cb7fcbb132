"""Propagate parameter uncertainty and read off acceptability curves.

One seeded Monte Carlo run produces the bundle every downstream analysis
shares. The acceptability curve is just the fraction of draws in which
each strategy has the best net monetary benefit.
"""

import numpy as np

from vantage import SOCIETAL, ce_plane_points, ceac, load_model_spec, run_psa
from vantage._resources import demo_config_path

spec = load_model_spec(demo_config_path())
bundle = run_psa(spec)
print(f"bundle: {bundle.iterations} iterations, seed {bundle.master_seed}")
print(f"sampled parameters: {', '.join(bundle.parameter_names)}\n")

grid = [0.0, 10000.0, 15000.0, 20000.0, 25000.0, 30000.0, 50000.0]
table = ceac(bundle, SOCIETAL, grid)
print("societal acceptability:")
print("   WTP      " + "  ".join(f"{n:>13s}" for n in table.strategy_names))
for wtp, row in zip(table.wtp_grid, table.probabilities):
    cells = "  ".join(f"{v:13.3f}" for v in row)
    print(f"{wtp:8.0f}   {cells}")

plane = ce_plane_points(bundle, SOCIETAL)
d_effect, d_cost = plane.points[:, 0], plane.points[:, 1]
print("\ncost-effectiveness plane (societal):")
print(f"  mean dE = {d_effect.mean():.3f} QALY, mean dC = {d_cost.mean():,.0f}")
print(f"  share of draws in the south-east (cheaper and better): "
      f"{np.mean((d_cost < 0) & (d_effect > 0)):.1%}")
print(f"  perspective shift (societal - health system) in mean dC: "
      f"{plane.delta_points[:, 1].mean():,.0f}")
