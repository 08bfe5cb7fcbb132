import csv
import dataclasses

import numpy as np
import pytest

from synthetic import make_bundle
from vantage.config import (
    DistributionSpec,
    HealthState,
    ModelSpec,
    PsaSettings,
    Strategy,
    Subgroup,
)
from vantage.markov import run_strategy
from vantage.metrics import HEALTH_SYSTEM, SOCIETAL
from vantage.psa import (
    _simulate_iteration,
    ce_plane_points,
    ceac,
    delta_nmb_distribution,
    run_psa,
    sample_parameters,
    write_samples_csv,
)


def small_spec(distributions=(), iterations=4, seed=99):
    return ModelSpec(
        states=(
            HealthState(name="Well", utility=0.9, cost_direct_medical=100.0),
            HealthState(
                name="Ill",
                utility=0.5,
                cost_direct_medical=1500.0,
                cost_productivity=2000.0,
                cost_out_of_pocket=100.0,
            ),
        ),
        strategies=(
            Strategy(
                name="usual",
                transition_matrix=((0.8, 0.2), (0.4, 0.6)),
                is_comparator=True,
            ),
            Strategy(
                name="new",
                transition_matrix=((0.9, 0.1), (0.4, 0.6)),
                one_time_cost=300.0,
            ),
        ),
        subgroups=(Subgroup(name="total", population_share=1.0, baseline_health=1.0),),
        initial_distribution=(1.0, 0.0),
        horizon_cycles=10,
        wtp_threshold=20000.0,
        psa=PsaSettings(
            iterations=iterations, seed=seed, distributions=tuple(distributions)
        ),
    )


class TestSampleParameters:
    def test_no_distributions_is_identity(self):
        spec = small_spec()
        draw = sample_parameters(spec, 0)
        assert draw.names == ()
        assert draw.assignment == {}

    def test_same_seed_index_is_deterministic(self):
        spec = small_spec(
            [DistributionSpec("beta", "states.Ill.utility", {"alpha": 2.0, "beta": 2.0})]
        )
        first = sample_parameters(spec, 2)
        second = sample_parameters(spec, 2)
        assert first.assignment == second.assignment
        np.testing.assert_array_equal(first.values, second.values)

    def test_beta_mean_and_support(self):
        n = 100_000
        spec = small_spec(
            [DistributionSpec("beta", "states.Ill.utility", {"alpha": 2.0, "beta": 2.0})],
            iterations=n,
        )
        draws = np.array(
            [sample_parameters(spec, i).values[0] for i in range(n)]
        )
        assert abs(draws.mean() - 0.5) < 0.005
        assert draws.min() >= 0.0 and draws.max() <= 1.0

    def test_dirichlet_row_renormalizes_and_keeps_zeros(self):
        spec = small_spec(
            [
                DistributionSpec(
                    "dirichlet-row",
                    "strategies.usual.transition_matrix.Well",
                    {"precision": 50.0},
                )
            ]
        )
        draw = sample_parameters(spec, 1)
        row = draw.assignment["strategies.usual.transition_matrix.Well"]
        assert abs(sum(row) - 1.0) < 1e-12
        assert all(0.0 <= v <= 1.0 for v in row)

    def test_structural_zero_preserved(self):
        spec = small_spec()
        spec = dataclasses.replace(
            spec,
            states=spec.states + (HealthState(name="Dead", utility=0.0, is_absorbing=True),),
            strategies=(
                Strategy(
                    name="usual",
                    transition_matrix=((0.7, 0.2, 0.1), (0.0, 0.9, 0.1), (0.0, 0.0, 1.0)),
                    is_comparator=True,
                ),
                Strategy(
                    name="new",
                    transition_matrix=((0.8, 0.1, 0.1), (0.0, 0.9, 0.1), (0.0, 0.0, 1.0)),
                ),
            ),
            initial_distribution=(1.0, 0.0, 0.0),
            psa=PsaSettings(
                iterations=3,
                seed=5,
                distributions=(
                    DistributionSpec(
                        "dirichlet-row",
                        "strategies.usual.transition_matrix.Ill",
                        {"precision": 30.0},
                    ),
                ),
            ),
        )
        draw = sample_parameters(spec, 0)
        row = draw.assignment["strategies.usual.transition_matrix.Ill"]
        assert row[0] == 0.0  # structurally impossible transition stays impossible

    def test_unbounded_kind_clipped_to_domain(self):
        spec = small_spec(
            [
                DistributionSpec(
                    "normal", "states.Ill.utility", {"mean": 0.99, "sd": 0.5}
                )
            ],
            iterations=200,
        )
        draws = np.array(
            [sample_parameters(spec, i).values[0] for i in range(200)]
        )
        assert draws.max() <= 1.0 and draws.min() >= 0.0

    def test_out_of_range_index_rejected(self):
        spec = small_spec(iterations=3)
        with pytest.raises(ValueError):
            sample_parameters(spec, 3)


class TestRunPsa:
    def test_point_mass_collapses_to_deterministic(self):
        spec = small_spec(
            [
                DistributionSpec(
                    "uniform",
                    "states.Ill.cost_direct_medical",
                    {"low": 1500.0, "high": 1500.0},
                )
            ],
            iterations=1,
        )
        bundle = run_psa(spec)
        _, led = run_strategy(spec, spec.strategies[1])
        assert bundle.outcomes[0, 1, 0, 0] == led.cost_direct_medical
        assert bundle.outcomes[0, 1, 0, 3] == led.qalys

    def test_same_seed_bitwise_reproducible(self, tmp_path):
        spec = small_spec(
            [DistributionSpec("beta", "states.Ill.utility", {"alpha": 5.0, "beta": 5.0})],
            iterations=20,
        )
        a, b = run_psa(spec), run_psa(spec)
        np.testing.assert_array_equal(a.outcomes, b.outcomes)
        np.testing.assert_array_equal(a.sampled_parameters, b.sampled_parameters)
        pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
        write_samples_csv(a, pa)
        write_samples_csv(b, pb)
        assert pa.read_bytes() == pb.read_bytes()

    def test_order_independence(self):
        from vantage.config import resolve_subgroup_spec

        spec = small_spec(
            [DistributionSpec("beta", "states.Ill.utility", {"alpha": 5.0, "beta": 5.0})],
            iterations=8,
        )
        forward = run_psa(spec)
        views = [resolve_subgroup_spec(spec, g) for g in spec.subgroups]
        reversed_outcomes = np.empty_like(forward.outcomes)
        reversed_samples = np.empty_like(forward.sampled_parameters)
        for i in reversed(range(spec.psa.iterations)):
            draw, disc, _ = _simulate_iteration(spec, views, i)
            reversed_outcomes[i] = disc
            reversed_samples[i] = draw.values
        np.testing.assert_array_equal(forward.outcomes, reversed_outcomes)
        np.testing.assert_array_equal(forward.sampled_parameters, reversed_samples)

    def test_common_random_parameters_across_strategies(self):
        # One draw per iteration feeds every strategy; the sampled matrix must
        # equal a direct re-draw for that iteration index.
        spec = small_spec(
            [DistributionSpec("gamma", "states.Ill.cost_productivity", {"shape": 9.0, "scale": 200.0})],
            iterations=6,
        )
        bundle = run_psa(spec)
        for i in range(6):
            np.testing.assert_array_equal(
                bundle.sampled_parameters[i], sample_parameters(spec, i).values
            )

    def test_mean_delta_nmb_consistent_with_deterministic(self, demo_spec, demo_bundle, demo_ledgers):
        new, comp = "Prevention", "StandardCare"
        nmb = demo_bundle.nmb(20000.0, HEALTH_SYSTEM)
        d = nmb[:, demo_bundle.strategy_index(new)] - nmb[:, demo_bundle.strategy_index(comp)]
        det = (
            (demo_ledgers[new].qalys - demo_ledgers[comp].qalys) * 20000.0
            - (
                HEALTH_SYSTEM.cost(demo_ledgers[new])
                - HEALTH_SYSTEM.cost(demo_ledgers[comp])
            )
        )
        se = d.std(ddof=1) / np.sqrt(len(d))
        assert abs(d.mean() - det) <= 2 * se

    def test_iteration_error_is_annotated(self):
        spec = small_spec(
            [DistributionSpec("beta", "states.Ill.utility", {"alpha": 5.0, "beta": 5.0})],
            iterations=4,
        )
        # Poison the model after validation: a non-stochastic base row.
        bad = dataclasses.replace(
            spec,
            strategies=(
                dataclasses.replace(
                    spec.strategies[0], transition_matrix=((0.5, 0.2), (0.4, 0.6))
                ),
                spec.strategies[1],
            ),
        )
        with pytest.raises(RuntimeError, match="iteration 0"):
            run_psa(bad)


class TestCeac:
    def two_iteration_bundle(self):
        # Hand-enumerable: NMB at wtp=1 equals QALYs below.
        nmb = np.array([[5.0, 8.0], [7.0, 3.0]])
        outcomes = np.zeros((2, 2, 1, 4))
        outcomes[:, :, 0, 3] = nmb
        return make_bundle(outcomes)

    def test_two_iteration_fractions_by_hand(self):
        bundle = self.two_iteration_bundle()
        table = ceac(bundle, SOCIETAL, [1.0])
        # Iteration 0: intervention wins (8 > 5); iteration 1: comparator.
        assert table.probabilities[0, 0] == pytest.approx(0.5)
        assert table.probabilities[0, 1] == pytest.approx(0.5)

    def test_dominant_strategy_probability_one(self):
        outcomes = np.zeros((10, 2, 1, 4))
        outcomes[:, 0, 0, 3] = 1.0
        outcomes[:, 1, 0, 3] = 2.0  # intervention better everywhere, costs zero
        bundle = make_bundle(outcomes)
        table = ceac(bundle, SOCIETAL, [0.0, 10000.0, 50000.0])
        np.testing.assert_allclose(table.probabilities[1:, 1], 1.0)

    def test_zero_threshold_is_cost_minimization(self):
        outcomes = np.zeros((4, 2, 1, 4))
        outcomes[:, 0, 0, 0] = 100.0  # comparator dearer
        outcomes[:, 1, 0, 0] = 50.0
        outcomes[:, :, 0, 3] = 1.0
        bundle = make_bundle(outcomes)
        table = ceac(bundle, HEALTH_SYSTEM, [0.0])
        assert table.probabilities[0, 1] == 1.0

    def test_probabilities_sum_to_one(self, demo_bundle):
        grid = [float(v) for v in range(0, 150001, 5000)]
        table = ceac(demo_bundle, SOCIETAL, grid)
        sums = table.probabilities.sum(axis=1)
        np.testing.assert_allclose(sums, 1.0, atol=1e-12)

    def test_monotone_for_positive_delta_effect(self, demo_bundle):
        qalys = demo_bundle.aggregate_qalys()
        d_effect = qalys[:, 1] - qalys[:, 0]
        assert d_effect.min() > 0
        grid = [float(v) for v in range(0, 150001, 5000)]
        table = ceac(demo_bundle, SOCIETAL, grid)
        prevention = table.probabilities[:, 1]
        assert np.all(np.diff(prevention) >= 0)

    def test_empty_grid_rejected(self, demo_bundle):
        with pytest.raises(ValueError):
            ceac(demo_bundle, SOCIETAL, [])

    def test_tie_rule_matches_decide(self):
        outcomes = np.zeros((3, 2, 1, 4))
        outcomes[:, :, 0, 3] = 4.0  # exact ties everywhere
        bundle = make_bundle(outcomes)
        table = ceac(bundle, SOCIETAL, [1.0])
        assert table.probabilities[0, 0] == 1.0  # comparator takes ties


class TestCePlane:
    def test_zero_gap_collapses_delta_cloud(self):
        outcomes = np.zeros((5, 2, 1, 4))
        outcomes[:, 1, 0, 0] = 100.0
        outcomes[:, 1, 0, 3] = 0.5
        bundle = make_bundle(outcomes)
        result = ce_plane_points(bundle, SOCIETAL)
        np.testing.assert_array_equal(result.delta_points, 0.0)

    def test_point_mass_single_point(self):
        spec = small_spec(iterations=3)
        bundle = run_psa(spec)
        result = ce_plane_points(bundle, HEALTH_SYSTEM)
        assert np.unique(result.points, axis=0).shape[0] == 1

    def test_cloud_mean_matches_csv_recompute(self, demo_bundle, tmp_path):
        path = tmp_path / "samples.csv"
        write_samples_csv(demo_bundle, path)
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        shares = dict(zip(demo_bundle.subgroup_names, demo_bundle.subgroup_shares))

        def agg(row, strategy, component):
            return sum(
                shares[g] * float(row[f"{strategy}.{g}.{component}"])
                for g in demo_bundle.subgroup_names
            )

        d_effect = np.array(
            [agg(r, "Prevention", "qalys") - agg(r, "StandardCare", "qalys") for r in rows]
        )
        d_cost = np.array(
            [
                (agg(r, "Prevention", "cost_direct") - agg(r, "StandardCare", "cost_direct"))
                + (agg(r, "Prevention", "cost_prod") - agg(r, "StandardCare", "cost_prod"))
                + (agg(r, "Prevention", "cost_oop") - agg(r, "StandardCare", "cost_oop"))
                for r in rows
            ]
        )
        result = ce_plane_points(demo_bundle, SOCIETAL)
        assert result.points[:, 0].mean() == pytest.approx(d_effect.mean(), rel=1e-12)
        assert result.points[:, 1].mean() == pytest.approx(d_cost.mean(), rel=1e-9)


class TestDeltaNmb:
    def test_zero_gap_all_zero(self):
        outcomes = np.zeros((5, 2, 1, 4))
        outcomes[:, 1, 0, 0] = 100.0
        outcomes[:, 1, 0, 3] = 0.5
        bundle = make_bundle(outcomes)
        result = delta_nmb_distribution(bundle, 20000.0)
        np.testing.assert_array_equal(result.series, 0.0)

    def test_equals_negative_perspective_cost_gap(self, demo_bundle):
        result = delta_nmb_distribution(demo_bundle, 20000.0)
        prod = demo_bundle.outcomes[..., 1] @ np.asarray(demo_bundle.subgroup_shares)
        oop = demo_bundle.outcomes[..., 2] @ np.asarray(demo_bundle.subgroup_shares)
        gap = (prod[:, 1] + oop[:, 1]) - (prod[:, 0] + oop[:, 0])
        np.testing.assert_allclose(result.series, -gap, rtol=1e-9)

    def test_quantiles_match_sorted_interpolation(self, demo_bundle):
        result = delta_nmb_distribution(demo_bundle, 20000.0)
        series = np.sort(result.series)
        n = len(series)
        for q, value in result.quantiles.items():
            h = (n - 1) * (q / 100.0)
            lo, hi = int(np.floor(h)), int(np.ceil(h))
            expected = series[lo] + (h - lo) * (series[hi] - series[lo])
            assert value == pytest.approx(expected, rel=1e-12)
