"""Turn the inequality-aversion knob and watch the equity-weighted NMB move.

Weights follow (reference / baseline health)^aversion: gains to the
worse-off subgroup count for more as aversion rises. At aversion zero the
analysis is ordinary population-aggregated CEA.
"""

import numpy as np

from vantage import (
    SOCIETAL,
    atkinson_weights,
    equity_plane,
    equity_weighted_nmb,
    load_model_spec,
    resolve_subgroup_spec,
    run_psa,
    run_strategy,
)
from vantage._resources import demo_config_path

spec = load_model_spec(demo_config_path())
comparator = spec.comparator()
intervention = spec.interventions()[0]

increments = {}
for group in spec.subgroups:
    view = resolve_subgroup_spec(spec, group)
    _, led_comp = run_strategy(view, comparator)
    _, led_new = run_strategy(view, intervention)
    increments[group.name] = (
        led_new.qalys - led_comp.qalys,
        SOCIETAL.cost(led_new) - SOCIETAL.cost(led_comp),
    )
    print(
        f"{group.name:12s} baseline health {group.baseline_health:.2f}, "
        f"dQ = {increments[group.name][0]:.3f}, dC = {increments[group.name][1]:,.0f}"
    )

print("\naversion   weights (advantaged, deprived)   equity-weighted dNMB")
for eps in (0.0, 0.5, 1.0, 2.0, 3.0):
    weights = atkinson_weights(spec.subgroups, eps, "population-mean")
    value = equity_weighted_nmb(increments, weights, spec.wtp_threshold)
    w = list(weights.weights.values())
    print(f"{eps:8.1f}   ({w[0]:.3f}, {w[1]:.3f})               {value:12,.0f}")

bundle = run_psa(spec)
points = equity_plane(bundle, spec.wtp_threshold, spec.inequality_aversion)
nhb = np.array([p.net_health_benefit for p in points])
impact = np.array([p.equity_impact for p in points])
print(
    f"\nequity plane over {len(points)} draws: "
    f"win-win (better health AND less inequality) in "
    f"{np.mean((nhb > 0) & (impact > 0)):.1%} of draws"
)
