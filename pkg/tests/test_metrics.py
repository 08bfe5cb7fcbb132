import numpy as np
import pytest

from synthetic import ledger
from vantage.metrics import (
    CLASS_DOMINANT,
    CLASS_DOMINATED,
    CLASS_EXTENDED_TIE,
    CLASS_ICER,
    HEALTH_SYSTEM,
    SOCIETAL,
    decide,
    icer,
    nmb,
)


class TestIcer:
    def test_plain_ratio(self):
        result = icer(ledger(), ledger(dm=5000.0, qalys=0.5), HEALTH_SYSTEM)
        assert result.classification == CLASS_ICER
        assert result.icer_value == pytest.approx(10000.0)

    def test_cost_saving_is_dominant(self):
        result = icer(ledger(dm=1000.0), ledger(qalys=0.2), HEALTH_SYSTEM)
        assert result.classification == CLASS_DOMINANT
        assert result.delta_cost == pytest.approx(-1000.0)
        assert result.icer_value is None

    def test_costlier_no_better_is_dominated(self):
        result = icer(ledger(qalys=0.3), ledger(dm=100.0, qalys=0.2), HEALTH_SYSTEM)
        assert result.classification == CLASS_DOMINATED

    def test_zero_effect_is_extended_tie(self):
        result = icer(ledger(), ledger(dm=100.0), HEALTH_SYSTEM)
        assert result.classification == CLASS_EXTENDED_TIE
        assert result.icer_value is None

    def test_perspective_filters_components(self):
        comparator = ledger()
        new = ledger(dm=100.0, prod=300.0, oop=50.0, qalys=0.1)
        hs = icer(comparator, new, HEALTH_SYSTEM)
        soc = icer(comparator, new, SOCIETAL)
        assert hs.delta_cost == pytest.approx(100.0)
        assert soc.delta_cost == pytest.approx(450.0)
        assert hs.delta_effect == soc.delta_effect


class TestNmb:
    def test_direct_arithmetic(self):
        assert nmb(ledger(dm=60000.0, qalys=2.0), 50000.0, HEALTH_SYSTEM) == pytest.approx(
            40000.0
        )

    def test_zero_threshold_is_negative_cost(self):
        led = ledger(dm=1234.0, qalys=3.0)
        assert nmb(led, 0.0, HEALTH_SYSTEM) == pytest.approx(-1234.0)

    def test_negative_threshold_rejected(self):
        with pytest.raises(ValueError):
            nmb(ledger(), -1.0, HEALTH_SYSTEM)

    def test_perspective_gap_is_prod_plus_oop(self):
        led = ledger(dm=500.0, prod=200.0, oop=40.0, qalys=1.0)
        gap = nmb(led, 30000.0, SOCIETAL) - nmb(led, 30000.0, HEALTH_SYSTEM)
        assert gap == pytest.approx(-(200.0 + 40.0))


class TestDecide:
    def test_demo_discordance_at_20k(self, demo_ledgers):
        hs = decide(demo_ledgers, 20000.0, HEALTH_SYSTEM, "StandardCare")
        soc = decide(demo_ledgers, 20000.0, SOCIETAL, "StandardCare")
        assert hs.chosen_strategy == "StandardCare"
        assert soc.chosen_strategy == "Prevention"

    def test_demo_agreement_at_50k(self, demo_ledgers):
        hs = decide(demo_ledgers, 50000.0, HEALTH_SYSTEM, "StandardCare")
        soc = decide(demo_ledgers, 50000.0, SOCIETAL, "StandardCare")
        assert hs.chosen_strategy == soc.chosen_strategy == "Prevention"

    def test_identical_ledgers_tie_to_comparator(self):
        ledgers = {"a": ledger(dm=10.0, qalys=1.0), "b": ledger(dm=10.0, qalys=1.0)}
        record = decide(ledgers, 20000.0, HEALTH_SYSTEM, "a")
        assert record.chosen_strategy == "a"

    def test_single_strategy_rejected(self):
        with pytest.raises(ValueError):
            decide({"a": ledger()}, 1.0, HEALTH_SYSTEM, "a")

    def test_lambda_sweep_switches_at_most_once(self):
        # Affine NMB difference in the threshold: brute-force sweep oracle.
        comparator = ledger(dm=1000.0, qalys=1.0)
        new = ledger(dm=6000.0, qalys=1.25)
        ledgers = {"comparator": comparator, "new": new}
        icer_value = (6000.0 - 1000.0) / 0.25  # 20000
        chosen = []
        for wtp in np.arange(0.0, 100000.0, 500.0):
            record = decide(ledgers, float(wtp), HEALTH_SYSTEM, "comparator")
            chosen.append(record.chosen_strategy)
        switches = sum(1 for a, b in zip(chosen, chosen[1:]) if a != b)
        assert switches == 1
        # Accepts strictly above the ICER, rejects at or below it.
        for wtp, name in zip(np.arange(0.0, 100000.0, 500.0), chosen):
            if wtp > icer_value:
                assert name == "new"
            else:
                assert name == "comparator"

    def test_argmax_invariant_to_common_shift(self):
        ledgers = {
            "comparator": ledger(dm=500.0, qalys=1.0),
            "new": ledger(dm=900.0, qalys=1.1),
        }
        shifted = {
            name: ledger(
                dm=led.cost_direct_medical - 250.0, qalys=led.qalys
            )
            for name, led in ledgers.items()
        }
        wtp = 10000.0
        base = decide(ledgers, wtp, HEALTH_SYSTEM, "comparator")
        moved = decide(shifted, wtp, HEALTH_SYSTEM, "comparator")
        assert base.chosen_strategy == moved.chosen_strategy

    def test_perspective_filter_identical_when_gap_zero(self):
        ledgers = {
            "comparator": ledger(dm=500.0, qalys=1.0),
            "new": ledger(dm=900.0, qalys=1.2),
        }
        wtp = 15000.0
        hs = decide(ledgers, wtp, HEALTH_SYSTEM, "comparator")
        soc = decide(ledgers, wtp, SOCIETAL, "comparator")
        assert hs.chosen_strategy == soc.chosen_strategy
        assert hs.nmb_per_strategy == soc.nmb_per_strategy

    def test_multiway_picks_best(self):
        ledgers = {
            "comparator": ledger(dm=0.0, qalys=1.0),
            "mid": ledger(dm=100.0, qalys=1.5),
            "best": ledger(dm=150.0, qalys=2.0),
        }
        record = decide(ledgers, 1000.0, HEALTH_SYSTEM, "comparator")
        assert record.chosen_strategy == "best"
