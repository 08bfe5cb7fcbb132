"""Deterministic cost-effectiveness arithmetic: ICER, NMB, decision rule.

Two accounting perspectives are built in: the health-system perspective
counts direct medical costs only; the societal perspective adds productivity
and out-of-pocket costs. QALYs are identical under both.

Classification order for incremental results: a near-zero QALY difference
(|dE| < 1e-12) is always reported as `extended_tie` because the ratio is
undefined there; outside that guard, sign patterns map to dominant /
dominated, and the remaining mixed-sign cases carry a finite ICER.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from .markov import OutcomeLedger

EFFECT_TIE_TOL = 1e-12
NMB_TIE_TOL = 1e-9

CLASS_ICER = "icer"
CLASS_DOMINANT = "dominant"
CLASS_DOMINATED = "dominated"
CLASS_EXTENDED_TIE = "extended_tie"


_CANONICAL_COMPONENTS = {
    "health_system": frozenset({"direct_medical"}),
    "societal": frozenset({"direct_medical", "productivity", "out_of_pocket"}),
}


@dataclass(frozen=True)
class Perspective:
    """An accounting boundary: which cost components enter the analysis.

    Only the two canonical perspectives exist: the health system counts
    direct medical costs alone; society counts all three components.
    """

    name: str
    included_components: frozenset[str]

    def __post_init__(self):
        expected = _CANONICAL_COMPONENTS.get(self.name)
        if expected is None:
            raise ValueError(
                f"unknown perspective {self.name!r}; "
                f"expected one of {sorted(_CANONICAL_COMPONENTS)}"
            )
        if self.included_components != expected:
            raise ValueError(
                f"perspective {self.name!r} must include exactly {sorted(expected)}"
            )

    def cost(self, ledger: OutcomeLedger) -> float:
        total = 0.0
        if "direct_medical" in self.included_components:
            total += ledger.cost_direct_medical
        if "productivity" in self.included_components:
            total += ledger.cost_productivity
        if "out_of_pocket" in self.included_components:
            total += ledger.cost_out_of_pocket
        return total


HEALTH_SYSTEM = Perspective("health_system", frozenset({"direct_medical"}))
SOCIETAL = Perspective(
    "societal", frozenset({"direct_medical", "productivity", "out_of_pocket"})
)

PERSPECTIVES: Mapping[str, Perspective] = {
    HEALTH_SYSTEM.name: HEALTH_SYSTEM,
    SOCIETAL.name: SOCIETAL,
}


@dataclass(frozen=True)
class IcerResult:
    """Incremental cost-effectiveness with explicit dominance classification.

    `icer_value` is present only when classification is `icer`; dominance
    and ties never expose a bare ratio because its sign is ambiguous.
    """

    delta_cost: float
    delta_effect: float
    classification: str
    icer_value: Optional[float] = None


@dataclass(frozen=True)
class DecisionRecord:
    """The NMB-optimal strategy at one willingness-to-pay threshold."""

    wtp: float
    perspective: str
    chosen_strategy: str
    nmb_per_strategy: Mapping[str, float]
    discordant_with: Optional[str] = None


def icer(
    comparator: OutcomeLedger, new: OutcomeLedger, perspective: Perspective
) -> IcerResult:
    """Incremental cost per QALY of `new` versus `comparator`."""
    delta_cost = perspective.cost(new) - perspective.cost(comparator)
    delta_effect = new.qalys - comparator.qalys
    if abs(delta_effect) < EFFECT_TIE_TOL:
        return IcerResult(delta_cost, delta_effect, CLASS_EXTENDED_TIE)
    if delta_cost <= 0 and delta_effect >= 0:
        return IcerResult(delta_cost, delta_effect, CLASS_DOMINANT)
    if delta_cost >= 0 and delta_effect <= 0:
        return IcerResult(delta_cost, delta_effect, CLASS_DOMINATED)
    return IcerResult(delta_cost, delta_effect, CLASS_ICER, delta_cost / delta_effect)


def nmb(ledger: OutcomeLedger, wtp: float, perspective: Perspective) -> float:
    """Net monetary benefit: QALYs valued at the threshold, minus cost."""
    if wtp < 0:
        raise ValueError(f"willingness-to-pay must be >= 0, got {wtp}")
    return ledger.qalys * wtp - perspective.cost(ledger)


def decide(
    ledgers: Mapping[str, OutcomeLedger],
    wtp: float,
    perspective: Perspective,
    comparator_name: str,
) -> DecisionRecord:
    """Choose the NMB-maximizing strategy; ties go to the comparator.

    A challenger must beat the comparator by more than 1e-9 in NMB to be
    chosen (status-quo bias as the conservative default). Among several
    challengers within 1e-9 of each other, the first in mapping order wins.
    """
    if len(ledgers) < 2:
        raise ValueError("decision requires at least two strategies")
    if comparator_name not in ledgers:
        raise ValueError(f"comparator {comparator_name!r} not among strategies")
    nmbs = {name: nmb(led, wtp, perspective) for name, led in ledgers.items()}
    best_name = comparator_name
    best_value = nmbs[comparator_name]
    for name, value in nmbs.items():
        if name == comparator_name:
            continue
        if value > best_value + NMB_TIE_TOL:
            best_name = name
            best_value = value
    return DecisionRecord(
        wtp=wtp,
        perspective=perspective.name,
        chosen_strategy=best_name,
        nmb_per_strategy=nmbs,
    )
