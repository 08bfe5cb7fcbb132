"""Same model, two accounting boundaries, opposite funding decisions.

The bundled demonstration model prices a prevention programme. Counting
only direct medical costs, it fails a $20,000/QALY threshold; adding
productivity and out-of-pocket savings, it clears it easily.
"""

from vantage import (
    HEALTH_SYSTEM,
    SOCIETAL,
    combine_ledgers,
    decide,
    icer,
    load_model_spec,
    resolve_subgroup_spec,
    run_strategy,
)
from vantage._resources import demo_config_path

spec = load_model_spec(demo_config_path())
shares = [g.population_share for g in spec.subgroups]

ledgers = {}
for strategy in spec.strategies:
    per_subgroup = [
        run_strategy(resolve_subgroup_spec(spec, g), strategy)[1]
        for g in spec.subgroups
    ]
    ledgers[strategy.name] = combine_ledgers(per_subgroup, shares)

comparator = spec.comparator().name
intervention = spec.interventions()[0].name

for perspective in (HEALTH_SYSTEM, SOCIETAL):
    result = icer(ledgers[comparator], ledgers[intervention], perspective)
    record = decide(ledgers, spec.wtp_threshold, perspective, comparator)
    shown = (
        f"${result.icer_value:,.0f}/QALY"
        if result.classification == "icer"
        else result.classification
    )
    print(
        f"{perspective.name:14s} dC = {result.delta_cost:9.0f}  "
        f"dE = {result.delta_effect:.3f}  ICER = {shown:>14s}  "
        f"decision at ${spec.wtp_threshold:,.0f}: {record.chosen_strategy}"
    )
