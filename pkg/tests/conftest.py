import pytest

from vantage import load_model_spec, run_psa
from vantage._resources import demo_config_path
from vantage.config import resolve_subgroup_spec
from vantage.markov import combine_ledgers, run_strategy
from vantage.pipeline import run_analysis_pipeline


@pytest.fixture(scope="session")
def demo_spec():
    return load_model_spec(demo_config_path())


@pytest.fixture(scope="session")
def demo_bundle(demo_spec):
    return run_psa(demo_spec)


@pytest.fixture(scope="session")
def demo_ledgers(demo_spec):
    """Population-aggregated deterministic ledgers, one per strategy."""
    shares = [g.population_share for g in demo_spec.subgroups]
    out = {}
    for strategy in demo_spec.strategies:
        parts = [
            run_strategy(resolve_subgroup_spec(demo_spec, g), strategy)[1]
            for g in demo_spec.subgroups
        ]
        out[strategy.name] = combine_ledgers(parts, shares)
    return out


@pytest.fixture(scope="session")
def demo_output(demo_spec, tmp_path_factory):
    """One full pipeline run over the bundled demo model."""
    out_dir = tmp_path_factory.mktemp("demo_results")
    bundle = run_analysis_pipeline(demo_spec, out_dir)
    return out_dir, bundle
