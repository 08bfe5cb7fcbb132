"""Regenerate the dashboard test fixtures from the analysis engine.

Produces, under frontend/tests/fixtures/:
  results.json, psa_samples.csv  - one pipeline run over the bundled demo
  agreement_grid.json            - engine-computed values at 20 random
                                   (threshold, aversion) slider grid points,
                                   which the TypeScript tests must reproduce
                                   to 1e-6 relative.

Run from the repository root or frontend/:  python scripts/make_fixtures.py
"""

import json
import shutil
import tempfile
from pathlib import Path

import numpy as np

from vantage import (
    HEALTH_SYSTEM,
    SOCIETAL,
    combine_ledgers,
    decide,
    deterministic_vop,
    evop,
    load_model_spec,
    resolve_subgroup_spec,
    run_analysis_pipeline,
    run_psa,
    run_strategy,
)
from vantage._resources import demo_config_path
from vantage.equity import atkinson_weights, equity_weighted_nmb
from vantage.psa import ceac

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    spec = load_model_spec(demo_config_path())

    with tempfile.TemporaryDirectory() as tmp:
        run_analysis_pipeline(spec, tmp)
        shutil.copy(Path(tmp) / "results.json", FIXTURES / "results.json")
        shutil.copy(Path(tmp) / "psa_samples.csv", FIXTURES / "psa_samples.csv")

    bundle = run_psa(spec)
    shares = [g.population_share for g in spec.subgroups]
    ledgers = {
        s.name: combine_ledgers(
            [
                run_strategy(resolve_subgroup_spec(spec, g), s)[1]
                for g in spec.subgroups
            ],
            shares,
        )
        for s in spec.strategies
    }
    comparator = spec.comparator().name
    intervention = spec.interventions()[0].name
    increments = {}
    for g in spec.subgroups:
        view = resolve_subgroup_spec(spec, g)
        _, led_comp = run_strategy(view, spec.comparator())
        _, led_new = run_strategy(view, spec.interventions()[0])
        increments[g.name] = (
            led_new.qalys - led_comp.qalys,
            SOCIETAL.cost(led_new) - SOCIETAL.cost(led_comp),
        )

    rng = np.random.default_rng(42)
    points = []
    for _ in range(20):
        wtp = float(rng.integers(0, 301) * 500)  # slider grid 0..150000 step 500
        epsilon = float(rng.integers(0, 61) * 0.05)  # 0..3 step 0.05
        record = {}
        for perspective in (HEALTH_SYSTEM, SOCIETAL):
            decision = decide(ledgers, wtp, perspective, comparator)
            record[perspective.name] = {
                "chosen": decision.chosen_strategy,
                "nmb_per_strategy": dict(decision.nmb_per_strategy),
            }
        weights = atkinson_weights(spec.subgroups, epsilon, spec.reference_health)
        vop_result = evop(bundle, wtp)
        ceac_soc = ceac(bundle, SOCIETAL, [wtp]).probabilities[0]
        points.append(
            {
                "lambda": wtp,
                "epsilon": epsilon,
                "decisions": record,
                "deterministic_vop": deterministic_vop(ledgers, wtp, comparator),
                "evop": vop_result.evop,
                "discordance_probability": vop_result.discordance_probability,
                "nmb_eq": equity_weighted_nmb(increments, weights, wtp),
                "ceac_societal": {
                    name: float(p)
                    for name, p in zip(spec.strategy_names, ceac_soc)
                },
            }
        )

    grid = {
        "comparator": comparator,
        "intervention": intervention,
        "points": points,
    }
    (FIXTURES / "agreement_grid.json").write_text(json.dumps(grid, indent=2))
    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()
