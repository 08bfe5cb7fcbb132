"""Deterministic drivers, affordability, and the burden of the status quo.

The tornado re-runs the model at each parameter's range ends; Sobol
indices split the outcome variance among parameters; the budget impact
scales per-person incremental costs to the eligible population; cost of
illness tabulates what the disease costs under the comparator.
"""

from vantage import budget_impact, cost_of_illness, load_model_spec
from vantage.sensitivity import sobol_indices, tornado
from vantage._resources import demo_config_path

spec = load_model_spec(demo_config_path())

print("tornado (default +/-20% ranges), widest swing first:")
for entry in tornado(spec):
    print(
        f"  {entry.parameter:45s} width {entry.bar_width:10,.0f} "
        f"[{entry.outcome_at_low:,.0f} .. {entry.outcome_at_high:,.0f}]"
    )

print("\nSobol indices (first order / total order):")
result = sobol_indices(spec, base_samples=512, n_boot=50)
for j, name in enumerate(result.parameter_names):
    print(
        f"  {name:45s} {result.first_order[j]:6.3f} / {result.total_order[j]:6.3f}"
        f"   (noise ~{max(result.noise_first[j], result.noise_total[j]):.3f})"
    )

print("\nbudget impact (health-system perspective, undiscounted):")
bi = budget_impact(spec)
for row in bi.rows:
    print(
        f"  year {row.year}: {row.incremental_cost_per_person:8,.0f}/person x "
        f"uptake {row.uptake:.2f} x {row.population:,.0f} people = "
        f"{row.bi_year:14,.0f}  (cumulative {row.bi_cumulative:14,.0f})"
    )

print("\ncost of illness under the comparator:")
for row in cost_of_illness(spec).rows:
    print(
        f"  {row.component:16s} {row.per_capita_annual:10,.0f}/person-year, "
        f"population {row.population_annual:16,.0f}/year"
    )
