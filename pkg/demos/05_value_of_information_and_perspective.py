"""What is uncertainty costing us, and what is the narrow perspective costing us?

EVPI prices the elimination of all parameter uncertainty; EVPPI attributes
that value to individual parameters. The perspective loss prices something
different: the societal net benefit forgone because the health-system
accounting picks the wrong strategy.
"""

from vantage import (
    HEALTH_SYSTEM,
    SOCIETAL,
    combine_ledgers,
    deterministic_vop,
    evop,
    evpi,
    evppi,
    load_model_spec,
    population_evpi,
    resolve_subgroup_spec,
    run_psa,
    run_strategy,
)
from vantage._resources import demo_config_path

spec = load_model_spec(demo_config_path())
bundle = run_psa(spec)
wtp = spec.wtp_threshold

for perspective in (HEALTH_SYSTEM, SOCIETAL):
    per_person = evpi(bundle, wtp, perspective)
    scaled = population_evpi(per_person, spec.bia.eligible_population)
    print(
        f"EVPI ({perspective.name}): {per_person:8,.0f} per person, "
        f"{scaled:14,.0f} over {spec.bia.eligible_population:,.0f} people"
    )

print("\nEVPPI by parameter (societal):")
for name in bundle.parameter_names:
    value = evppi(bundle, [name], wtp, SOCIETAL)
    print(f"  {name:45s} {value:10,.0f}")

shares = [g.population_share for g in spec.subgroups]
ledgers = {
    s.name: combine_ledgers(
        [run_strategy(resolve_subgroup_spec(spec, g), s)[1] for g in spec.subgroups],
        shares,
    )
    for s in spec.strategies
}
base_loss = deterministic_vop(ledgers, wtp, spec.comparator().name)
result = evop(bundle, wtp, deterministic_loss=base_loss)
print(f"\nperspective loss at base parameters: {base_loss:,.0f} per person")
print(f"expected value of perspective (EVoP): {result.evop:,.0f} per person")
print(f"probability the perspectives disagree: {result.discordance_probability:.1%}")
