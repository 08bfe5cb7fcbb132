"""Budget impact analysis and cost-of-illness tabulation.

Budget impact multiplies the per-person incremental cost of the intervention
in each year by the uptake rate and the eligible population, summing over a
short horizon. Flows come from the engine's undiscounted per-cycle cost
breakdown, filtered to the budget holder's perspective (health system by
default), and stay undiscounted unless the configuration turns discounting
on.

Cost of illness tabulates the comparator arm's economic burden by payer
component, per capita per year, and scales to the eligible population when
one is configured. It is independent of the intervention entirely.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .config import BudgetImpactSpec, ModelSpec, resolve_subgroup_spec
from .markov import OutcomeLedger, PerCycleBreakdown, combine_ledgers, run_strategy
from .metrics import HEALTH_SYSTEM, Perspective


@dataclass(frozen=True)
class BudgetImpactRow:
    year: int
    incremental_cost_per_person: float
    uptake: float
    population: float
    bi_year: float
    bi_cumulative: float


@dataclass(frozen=True)
class BudgetImpactResult:
    perspective: str
    discounted: bool
    rows: tuple[BudgetImpactRow, ...]

    @property
    def cumulative(self) -> float:
        return self.rows[-1].bi_cumulative if self.rows else 0.0


@dataclass(frozen=True)
class CoiRow:
    component: str
    per_capita_annual: float
    per_capita_cumulative: float
    population_annual: Optional[float]
    population_cumulative: Optional[float]


@dataclass(frozen=True)
class CoiTable:
    """Comparator-arm burden by payer component; societal row is the exact sum."""

    rows: tuple[CoiRow, ...]

    def row(self, component: str) -> CoiRow:
        for r in self.rows:
            if r.component == component:
                return r
        raise KeyError(component)


def _population_breakdown(spec: ModelSpec, strategy_name: str) -> PerCycleBreakdown:
    """Share-weighted per-cycle breakdown of one strategy across subgroups."""
    strategy = spec.strategies[spec.strategy_names.index(strategy_name)]
    ledgers: list[OutcomeLedger] = []
    for g in spec.subgroups:
        view = resolve_subgroup_spec(spec, g)
        _, led = run_strategy(view, strategy)
        ledgers.append(led)
    combined = combine_ledgers(ledgers, [g.population_share for g in spec.subgroups])
    assert combined.per_cycle_breakdown is not None
    return combined.per_cycle_breakdown


def _component_flows(breakdown: PerCycleBreakdown, perspective: Perspective) -> np.ndarray:
    total = np.zeros_like(breakdown.direct_medical)
    if "direct_medical" in perspective.included_components:
        total = total + breakdown.direct_medical
    if "productivity" in perspective.included_components:
        total = total + breakdown.productivity
    if "out_of_pocket" in perspective.included_components:
        total = total + breakdown.out_of_pocket
    return total


def _annual_flows(per_cycle: np.ndarray, cycle_length: float, n_years: int) -> np.ndarray:
    """Attribute each cycle's flow to the calendar year containing its start."""
    years = np.floor(np.arange(per_cycle.shape[0]) * cycle_length).astype(int)
    annual = np.zeros(n_years)
    for t, flow in enumerate(per_cycle):
        if years[t] < n_years:
            annual[years[t]] += flow
    return annual


def budget_impact(
    spec: ModelSpec,
    bia: Optional[BudgetImpactSpec] = None,
    perspective: Perspective = HEALTH_SYSTEM,
) -> BudgetImpactResult:
    """Per-year and cumulative net budget impact of adopting the intervention."""
    bia = bia if bia is not None else spec.bia
    if bia is None:
        raise ValueError("no budget impact settings configured")
    interventions = spec.interventions()
    if len(interventions) != 1:
        raise ValueError("budget impact requires exactly one intervention")
    model_years = spec.horizon_cycles * spec.cycle_length_years
    if bia.horizon_years > model_years:
        raise ValueError(
            f"bia horizon of {bia.horizon_years} years exceeds the model horizon "
            f"({model_years:g} years)"
        )

    flows_new = _component_flows(
        _population_breakdown(spec, interventions[0].name), perspective
    )
    flows_comp = _component_flows(
        _population_breakdown(spec, spec.comparator().name), perspective
    )
    incremental = _annual_flows(
        flows_new - flows_comp, spec.cycle_length_years, bia.horizon_years
    )

    if isinstance(bia.uptake_rate, tuple):
        uptake = list(bia.uptake_rate)
    else:
        uptake = [bia.uptake_rate] * bia.horizon_years

    rows = []
    cumulative = 0.0
    for y in range(1, bia.horizon_years + 1):
        per_person = float(incremental[y - 1])
        bi_year = per_person * uptake[y - 1] * bia.eligible_population
        if bia.discounting:
            bi_year = bi_year / (1.0 + spec.discount_rate_costs) ** y
        cumulative += bi_year
        rows.append(
            BudgetImpactRow(
                year=y,
                incremental_cost_per_person=per_person,
                uptake=uptake[y - 1],
                population=bia.eligible_population,
                bi_year=bi_year,
                bi_cumulative=cumulative,
            )
        )
    return BudgetImpactResult(
        perspective=perspective.name, discounted=bia.discounting, rows=tuple(rows)
    )


def cost_of_illness(spec: ModelSpec) -> CoiTable:
    """Status-quo burden per payer component, annualized over the model horizon."""
    breakdown = _population_breakdown(spec, spec.comparator().name)
    horizon_years = spec.horizon_cycles * spec.cycle_length_years
    population = spec.bia.eligible_population if spec.bia is not None else None

    def make_row(component: str, total: float) -> CoiRow:
        annual = total / horizon_years
        return CoiRow(
            component=component,
            per_capita_annual=annual,
            per_capita_cumulative=total,
            population_annual=None if population is None else annual * population,
            population_cumulative=None if population is None else total * population,
        )

    totals = {
        "direct_medical": float(breakdown.direct_medical.sum()),
        "productivity": float(breakdown.productivity.sum()),
        "out_of_pocket": float(breakdown.out_of_pocket.sum()),
    }
    rows = [make_row(name, total) for name, total in totals.items()]
    # The societal row must be the exact sum of the component rows.
    societal = CoiRow(
        component="societal_total",
        per_capita_annual=sum(r.per_capita_annual for r in rows),
        per_capita_cumulative=sum(r.per_capita_cumulative for r in rows),
        population_annual=(
            None
            if population is None
            else sum(r.population_annual for r in rows)  # type: ignore[misc]
        ),
        population_cumulative=(
            None
            if population is None
            else sum(r.population_cumulative for r in rows)  # type: ignore[misc]
        ),
    )
    return CoiTable(rows=(*rows, societal))


def write_bia_csv(result: BudgetImpactResult, path: Union[str, Path]) -> None:
    lines = ["year,incremental_cost_per_person,uptake,population,bi_year,bi_cumulative"]
    for r in result.rows:
        lines.append(
            f"{r.year},{r.incremental_cost_per_person!r},{r.uptake!r},"
            f"{r.population!r},{r.bi_year!r},{r.bi_cumulative!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_coi_csv(table: CoiTable, path: Union[str, Path]) -> None:
    lines = ["component,per_capita_annual,population_annual,cumulative"]
    for r in table.rows:
        population_annual = "" if r.population_annual is None else repr(r.population_annual)
        cumulative = (
            repr(r.per_capita_cumulative)
            if r.population_cumulative is None
            else repr(r.population_cumulative)
        )
        lines.append(f"{r.component},{r.per_capita_annual!r},{population_annual},{cumulative}")
    Path(path).write_text("\n".join(lines) + "\n")
