import math

import numpy as np
import pytest

from synthetic import make_bundle
from vantage.config import Subgroup
from vantage.equity import (
    EquityWeights,
    aggregate_unweighted_nmb,
    atkinson_index,
    atkinson_weights,
    equity_plane,
    equity_weighted_nmb,
)


def groups(*specs):
    return [
        Subgroup(name=name, population_share=share, baseline_health=health)
        for name, share, health in specs
    ]


class TestAtkinsonWeights:
    def test_zero_aversion_gives_unit_weights(self):
        weights = atkinson_weights(
            groups(("a", 0.3, 0.9), ("b", 0.7, 0.6)), 0.0, 1.0
        )
        assert all(w == 1.0 for w in weights.weights.values())

    def test_hand_value(self):
        weights = atkinson_weights(groups(("g", 1.0, 0.8)), 0.5, 1.0)
        assert weights.weights["g"] == pytest.approx(1.118034, abs=1e-6)

    def test_equal_health_equal_weights(self):
        for eps in (0.0, 0.5, 2.0):
            weights = atkinson_weights(
                groups(("a", 0.5, 0.85), ("b", 0.5, 0.85)), eps, 1.0
            )
            assert weights.weights["a"] == weights.weights["b"]

    def test_population_mean_reference(self):
        weights = atkinson_weights(
            groups(("a", 0.25, 1.0), ("b", 0.75, 0.8)), 1.0, "population-mean"
        )
        assert weights.reference_health == pytest.approx(0.25 * 1.0 + 0.75 * 0.8)

    def test_weight_monotone_decreasing_in_health(self):
        weights = atkinson_weights(
            groups(("low", 0.2, 0.5), ("mid", 0.3, 0.75), ("high", 0.5, 1.0)),
            0.8,
            1.0,
        )
        assert (
            weights.weights["low"]
            > weights.weights["mid"]
            > weights.weights["high"]
        )

    def test_worse_off_weighted_above_one(self):
        weights = atkinson_weights(groups(("a", 0.5, 0.7), ("b", 0.5, 1.3)), 0.5, 1.0)
        assert weights.weights["a"] > 1.0
        assert weights.weights["b"] < 1.0

    def test_nonpositive_health_rejected(self):
        with pytest.raises(ValueError):
            atkinson_weights(groups(("a", 1.0, 0.0)), 0.5, 1.0)

    def test_negative_aversion_rejected(self):
        with pytest.raises(ValueError):
            atkinson_weights(groups(("a", 1.0, 1.0)), -0.1, 1.0)


class TestEquityWeightedNmb:
    def test_hand_arithmetic(self):
        weights = EquityWeights(
            epsilon=0.5,
            reference_health=1.0,
            weights={"a": 1.2, "b": 0.9},
            shares={"a": 0.5, "b": 0.5},
        )
        increments = {"a": (0.1, 1000.0), "b": (0.2, 1000.0)}
        value = equity_weighted_nmb(increments, weights, 20000.0)
        assert value == pytest.approx(1950.0)

    def test_zero_aversion_equals_unweighted_exactly(self):
        subgroups = groups(("a", 0.35, 0.9), ("b", 0.65, 0.7))
        weights = atkinson_weights(subgroups, 0.0, "population-mean")
        increments = {"a": (0.123, 456.7), "b": (0.089, 1234.5)}
        weighted = equity_weighted_nmb(increments, weights, 31000.0)
        unweighted = aggregate_unweighted_nmb(
            increments, {"a": 0.35, "b": 0.65}, 31000.0
        )
        assert weighted == unweighted  # bitwise, not approx

    def test_single_subgroup(self):
        weights = EquityWeights(
            epsilon=1.0, reference_health=1.0, weights={"g": 1.25}, shares={"g": 1.0}
        )
        value = equity_weighted_nmb({"g": (0.5, 2000.0)}, weights, 10000.0)
        assert value == pytest.approx(1.0 * 1.25 * (0.5 * 10000.0 - 2000.0))

    def test_missing_weight_rejected(self):
        weights = EquityWeights(
            epsilon=0.5, reference_health=1.0, weights={"a": 1.0}, shares={"a": 1.0}
        )
        with pytest.raises(KeyError):
            equity_weighted_nmb({"b": (0.1, 0.0)}, weights, 1000.0)

    def test_linear_in_increments(self):
        subgroups = groups(("a", 0.5, 0.9), ("b", 0.5, 0.7))
        weights = atkinson_weights(subgroups, 0.5, 1.0)
        base = equity_weighted_nmb(
            {"a": (0.1, 100.0), "b": (0.2, 200.0)}, weights, 5000.0
        )
        scaled = equity_weighted_nmb(
            {"a": (0.2, 200.0), "b": (0.4, 400.0)}, weights, 5000.0
        )
        assert scaled == pytest.approx(2.0 * base, rel=1e-12)

    def test_common_weight_scaling_preserves_preference(self):
        subgroups = groups(("a", 0.5, 0.9), ("b", 0.5, 0.7))
        weights = atkinson_weights(subgroups, 0.5, 1.0)
        scaled = EquityWeights(
            epsilon=weights.epsilon,
            reference_health=weights.reference_health,
            weights={k: 3.0 * v for k, v in weights.weights.items()},
            shares=weights.shares,
        )
        increments_x = {"a": (0.1, 100.0), "b": (0.2, 200.0)}
        increments_y = {"a": (0.05, 100.0), "b": (0.1, 200.0)}
        base_x = equity_weighted_nmb(increments_x, weights, 5000.0)
        base_y = equity_weighted_nmb(increments_y, weights, 5000.0)
        assert equity_weighted_nmb(increments_x, scaled, 5000.0) == pytest.approx(
            3.0 * base_x, rel=1e-12
        )
        # Preference order between alternatives is unchanged.
        assert (base_x > base_y) == (
            equity_weighted_nmb(increments_x, scaled, 5000.0)
            > equity_weighted_nmb(increments_y, scaled, 5000.0)
        )

    def test_continuity_in_epsilon(self):
        subgroups = groups(("a", 0.5, 0.9), ("b", 0.5, 0.7))
        increments = {"a": (0.1, 100.0), "b": (0.2, 200.0)}
        values = [
            equity_weighted_nmb(
                increments, atkinson_weights(subgroups, eps, 1.0), 5000.0
            )
            for eps in (0.0, 1e-9, 1e-6, 1e-3)
        ]
        assert abs(values[1] - values[0]) < 1e-3
        assert abs(values[3] - values[0]) < 1.0


class TestAtkinsonIndex:
    def test_equal_levels_zero(self):
        assert atkinson_index([0.8, 0.8, 0.8], [0.2, 0.3, 0.5], 0.7) == pytest.approx(
            0.0, abs=1e-15
        )

    def test_hand_value_at_half(self):
        # Independent hand evaluation of the share-weighted index.
        levels, shares, eps = (0.92, 0.76), (0.5, 0.5), 0.5
        mean = 0.5 * 0.92 + 0.5 * 0.76
        ede = (0.5 * math.sqrt(0.92) + 0.5 * math.sqrt(0.76)) ** 2
        expected = 1.0 - ede / mean
        assert atkinson_index(levels, shares, eps) == pytest.approx(expected, rel=1e-12)

    def test_aversion_one_uses_geometric_mean(self):
        levels, shares = (1.0, 0.5), (0.5, 0.5)
        ede = math.exp(0.5 * math.log(1.0) + 0.5 * math.log(0.5))
        expected = 1.0 - ede / 0.75
        assert atkinson_index(levels, shares, 1.0) == pytest.approx(expected, rel=1e-12)

    def test_positive_levels_required(self):
        with pytest.raises(ValueError):
            atkinson_index([1.0, 0.0], [0.5, 0.5], 0.5)


class TestEquityPlane:
    def two_group_bundle(self, qaly_gains, baseline=(0.9, 0.7), cost_gap=1000.0):
        outcomes = np.zeros((1, 2, 2, 4))
        outcomes[0, 1, :, 3] = qaly_gains  # intervention adds QALYs
        outcomes[0, 1, :, 0] = cost_gap
        return make_bundle(
            outcomes,
            subgroup_names=("a", "b"),
            subgroup_shares=(0.5, 0.5),
            subgroup_baseline_health=baseline,
        )

    def test_single_subgroup_rejected(self, demo_bundle):
        outcomes = np.zeros((2, 2, 1, 4))
        bundle = make_bundle(outcomes)
        with pytest.raises(ValueError, match="two subgroups"):
            equity_plane(bundle, 20000.0, 0.5)

    def test_identical_effects_equal_baseline_zero_impact(self):
        bundle = self.two_group_bundle((0.2, 0.2), baseline=(0.8, 0.8))
        points = equity_plane(bundle, 20000.0, 0.5)
        assert points[0].equity_impact == pytest.approx(0.0, abs=1e-15)

    def test_pro_poor_positive_nmb_lands_north_east(self):
        bundle = self.two_group_bundle((0.0, 0.4), cost_gap=100.0)
        points = equity_plane(bundle, 20000.0, 0.5)
        assert points[0].net_health_benefit > 0
        assert points[0].equity_impact > 0

    def test_hand_computed_coordinates(self):
        bundle = self.two_group_bundle((0.1, 0.3), baseline=(0.9, 0.7), cost_gap=800.0)
        points = equity_plane(bundle, 20000.0, 0.5)
        nhb_expected = 0.5 * (0.1 - 800.0 / 20000.0) + 0.5 * (0.3 - 800.0 / 20000.0)

        def hand_index(levels):
            mean = 0.5 * levels[0] + 0.5 * levels[1]
            ede = (0.5 * math.sqrt(levels[0]) + 0.5 * math.sqrt(levels[1])) ** 2
            return 1.0 - ede / mean

        impact_expected = -(hand_index((1.0, 1.0)) - hand_index((0.9, 0.7)))
        assert points[0].net_health_benefit == pytest.approx(nhb_expected, rel=1e-12)
        assert points[0].equity_impact == pytest.approx(impact_expected, rel=1e-12)

    def test_demo_bundle_point_count(self, demo_bundle):
        points = equity_plane(demo_bundle, 20000.0, 0.5)
        assert len(points) == demo_bundle.iterations
