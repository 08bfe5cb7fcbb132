"""Time-homogeneous Markov cohort engine with per-perspective cost ledgers.

The cohort is advanced by repeated right-multiplication of the occupancy
vector with the strategy's transition matrix. Costs accumulate in three
parallel components (direct medical, productivity, out-of-pocket) so that a
single run supports both the health-system and the societal accounting
boundary; QALYs accumulate from state utilities.

Accumulation window: state occupancy at the start of cycle t earns that
cycle's cost and utility, for t = 0 .. T-1. Discounting is discrete per
cycle at cycle start, d(t) = (1 + r)^(-t * cycle_length). An optional
half-cycle correction replaces occupancy at cycle start with the average of
start and end occupancy (trapezoid rule).

All functions here are pure; inputs are never mutated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .config import HealthState, ModelSpec, Strategy

ROW_SUM_TOL = 1e-9


@dataclass(frozen=True)
class CohortTrace:
    """Cycle-by-state occupancy: row t is the distribution after t cycles."""

    occupancy: np.ndarray  # shape (T+1, S)
    state_names: tuple[str, ...] = ()

    @property
    def horizon(self) -> int:
        return self.occupancy.shape[0] - 1

    @property
    def n_states(self) -> int:
        return self.occupancy.shape[1]

    def to_csv(self, path: Union[str, Path]) -> None:
        """Write `cycle,<state_1>,...,<state_S>` rows."""
        names = self.state_names or tuple(
            f"state_{i + 1}" for i in range(self.n_states)
        )
        lines = ["cycle," + ",".join(names)]
        for t, row in enumerate(self.occupancy):
            lines.append(f"{t}," + ",".join(repr(float(v)) for v in row))
        Path(path).write_text("\n".join(lines) + "\n")


@dataclass(frozen=True)
class PerCycleBreakdown:
    """Undiscounted per-cycle flows, aligned with trace cycles 0..T.

    The flow at index t is earned by occupancy at the start of cycle t;
    index T is always zero (nothing accrues beyond the horizon). One-time
    strategy costs appear at index 0 of their component.
    """

    direct_medical: np.ndarray
    productivity: np.ndarray
    out_of_pocket: np.ndarray
    qalys: np.ndarray


@dataclass(frozen=True)
class OutcomeLedger:
    """Discounted and undiscounted per-person outcomes for one model arm."""

    cost_direct_medical: float
    cost_productivity: float
    cost_out_of_pocket: float
    qalys: float
    cost_direct_medical_undiscounted: float
    cost_productivity_undiscounted: float
    cost_out_of_pocket_undiscounted: float
    qalys_undiscounted: float
    per_cycle_breakdown: PerCycleBreakdown | None = field(default=None, compare=False)

    def cost_societal(self) -> float:
        """Societal cost is always the exact sum of the three components."""
        return (
            self.cost_direct_medical + self.cost_productivity + self.cost_out_of_pocket
        )

    def cost_societal_undiscounted(self) -> float:
        return (
            self.cost_direct_medical_undiscounted
            + self.cost_productivity_undiscounted
            + self.cost_out_of_pocket_undiscounted
        )


def _normalized_rows(matrix: np.ndarray) -> np.ndarray:
    """Exact float renormalization of rows already summing to 1 within tolerance."""
    sums = matrix.sum(axis=1, keepdims=True)
    return matrix / sums


def run_cohort(
    matrix: np.ndarray | Sequence[Sequence[float]],
    initial: np.ndarray | Sequence[float],
    horizon: int,
) -> CohortTrace:
    """Advance a cohort for `horizon` cycles.

    The matrix must be square and row-stochastic within 1e-9; the initial
    distribution must sum to 1 within 1e-9. Both are renormalized exactly
    in floating point before iteration, which keeps every trace row summing
    to 1 within ~1e-14 even over long horizons; no per-step renormalization
    is applied, so row t+1 is exactly row t @ matrix.
    """
    m = np.asarray(matrix, dtype=float)
    p0 = np.asarray(initial, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"transition matrix must be square, got shape {m.shape}")
    if p0.shape != (m.shape[0],):
        raise ValueError(
            f"initial distribution has shape {p0.shape}, expected ({m.shape[0]},)"
        )
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    row_sums = m.sum(axis=1)
    if np.any(np.abs(row_sums - 1.0) > ROW_SUM_TOL):
        raise ValueError("transition matrix rows must sum to 1 within 1e-9")
    if abs(p0.sum() - 1.0) > ROW_SUM_TOL:
        raise ValueError("initial distribution must sum to 1 within 1e-9")
    if np.any(m < 0) or np.any(m > 1):
        raise ValueError("transition probabilities must lie in [0,1]")

    m = _normalized_rows(m)
    p0 = p0 / p0.sum()

    occupancy = np.empty((horizon + 1, m.shape[0]))
    occupancy[0] = p0
    for t in range(horizon):
        occupancy[t + 1] = occupancy[t] @ m
    return CohortTrace(occupancy=occupancy)


def run_cohort_batch(
    matrices: np.ndarray, initial: np.ndarray, horizon: int
) -> np.ndarray:
    """Vectorized cohort advance for a stack of transition matrices.

    matrices: (B, S, S) row-stochastic stack; initial: (S,) or (B, S).
    Returns occupancies of shape (B, T+1, S). Same normalization contract
    as run_cohort.
    """
    m = np.asarray(matrices, dtype=float)
    if m.ndim != 3 or m.shape[1] != m.shape[2]:
        raise ValueError(f"expected matrices of shape (B, S, S), got {m.shape}")
    b, s, _ = m.shape
    p0 = np.asarray(initial, dtype=float)
    if p0.ndim == 1:
        p0 = np.broadcast_to(p0, (b, s))
    if p0.shape != (b, s):
        raise ValueError(f"initial has shape {p0.shape}, expected ({b}, {s})")
    m = m / m.sum(axis=2, keepdims=True)
    p0 = p0 / p0.sum(axis=1, keepdims=True)

    occ = np.empty((b, horizon + 1, s))
    occ[:, 0, :] = p0
    for t in range(horizon):
        occ[:, t + 1, :] = np.einsum("bi,bij->bj", occ[:, t, :], m)
    return occ


def _friction_adjusted_column(
    column: np.ndarray, friction_cycles: float
) -> np.ndarray:
    """Replace absorbing-state occupancy by the mass still inside the friction window.

    Each cycle's incident entrants (occupancy increments) accrue productivity
    cost for at most `friction_cycles` cycles after entry; a fractional tail
    cycle is weighted proportionally.
    """
    entrants = np.empty_like(column)
    entrants[0] = column[0]
    entrants[1:] = np.diff(column)
    entrants = np.clip(entrants, 0.0, None)
    full = int(math.floor(friction_cycles))
    frac = friction_cycles - full
    window = np.ones(full + (1 if frac > 0 else 0))
    if frac > 0:
        window[-1] = frac
    if window.size == 0:
        return np.zeros_like(column)
    return np.convolve(entrants, window)[: column.shape[0]]


def accumulate_outcomes(
    trace: CohortTrace,
    states: Sequence[HealthState],
    strategy: Strategy,
    discount_costs: float,
    discount_effects: float,
    cycle_length: float = 1.0,
    *,
    half_cycle: bool = False,
    productivity_method: str = "human-capital",
    friction_period_years: float | None = None,
) -> OutcomeLedger:
    """Accumulate discounted costs per component and QALYs over a trace.

    Each component is sum over t = 0..T-1 of d(t) * occupancy(t) . values *
    cycle_length. The strategy's one-time cost is added at t=0 (discount
    factor 1) to its configured component. Under the friction-cost method,
    productivity flows from absorbing states are attenuated so each entrant
    cohort pays for at most friction_period_years.
    """
    occ = trace.occupancy
    n_states = occ.shape[1]
    if len(states) != n_states:
        raise ValueError(f"{len(states)} states given for a {n_states}-state trace")
    horizon = occ.shape[0] - 1

    utility = np.array([s.utility for s in states])
    values = {
        "direct_medical": np.array([s.cost_direct_medical for s in states]),
        "productivity": np.array([s.cost_productivity for s in states]),
        "out_of_pocket": np.array([s.cost_out_of_pocket for s in states]),
    }

    occ_prod = occ
    if (
        productivity_method == "friction-cost"
        and friction_period_years is not None
        and any(s.is_absorbing and s.cost_productivity > 0 for s in states)
    ):
        occ_prod = occ.copy()
        friction_cycles = friction_period_years / cycle_length
        for j, s in enumerate(states):
            if s.is_absorbing and s.cost_productivity > 0:
                occ_prod[:, j] = _friction_adjusted_column(occ[:, j], friction_cycles)

    if half_cycle:
        weights = 0.5 * (occ[:-1] + occ[1:])
        weights_prod = 0.5 * (occ_prod[:-1] + occ_prod[1:])
    else:
        weights = occ[:-1]
        weights_prod = occ_prod[:-1]

    t = np.arange(horizon)
    d_costs = np.power(1.0 + discount_costs, -t * cycle_length)
    d_effects = np.power(1.0 + discount_effects, -t * cycle_length)

    flows = {
        "direct_medical": weights @ values["direct_medical"] * cycle_length,
        "productivity": weights_prod @ values["productivity"] * cycle_length,
        "out_of_pocket": weights @ values["out_of_pocket"] * cycle_length,
    }
    qaly_flow = weights @ utility * cycle_length

    flows[strategy.one_time_cost_component] = flows[
        strategy.one_time_cost_component
    ].copy()
    flows[strategy.one_time_cost_component][0] += strategy.one_time_cost

    breakdown_arrays = {}
    for comp, flow in flows.items():
        arr = np.zeros(horizon + 1)
        arr[:horizon] = flow
        breakdown_arrays[comp] = arr
    qaly_arr = np.zeros(horizon + 1)
    qaly_arr[:horizon] = qaly_flow

    return OutcomeLedger(
        cost_direct_medical=float(d_costs @ flows["direct_medical"]),
        cost_productivity=float(d_costs @ flows["productivity"]),
        cost_out_of_pocket=float(d_costs @ flows["out_of_pocket"]),
        qalys=float(d_effects @ qaly_flow),
        cost_direct_medical_undiscounted=float(flows["direct_medical"].sum()),
        cost_productivity_undiscounted=float(flows["productivity"].sum()),
        cost_out_of_pocket_undiscounted=float(flows["out_of_pocket"].sum()),
        qalys_undiscounted=float(qaly_flow.sum()),
        per_cycle_breakdown=PerCycleBreakdown(
            direct_medical=breakdown_arrays["direct_medical"],
            productivity=breakdown_arrays["productivity"],
            out_of_pocket=breakdown_arrays["out_of_pocket"],
            qalys=qaly_arr,
        ),
    )


def run_strategy(spec: ModelSpec, strategy: Strategy) -> tuple[CohortTrace, OutcomeLedger]:
    """Simulate one strategy under a (possibly subgroup-resolved) spec view."""
    if strategy.name not in spec.strategy_names:
        raise ValueError(f"strategy {strategy.name!r} does not belong to this spec")
    strategy = spec.strategies[spec.strategy_names.index(strategy.name)]
    trace = run_cohort(
        strategy.transition_matrix, spec.initial_distribution, spec.horizon_cycles
    )
    trace = CohortTrace(occupancy=trace.occupancy, state_names=spec.state_names)
    ledger = accumulate_outcomes(
        trace,
        spec.states,
        strategy,
        spec.discount_rate_costs,
        spec.discount_rate_effects,
        spec.cycle_length_years,
        half_cycle=spec.half_cycle,
        productivity_method=spec.productivity_method,
        friction_period_years=spec.friction_period_years,
    )
    return trace, ledger


def combine_ledgers(
    ledgers: Sequence[OutcomeLedger], weights: Sequence[float]
) -> OutcomeLedger:
    """Weighted linear combination of ledgers (e.g. subgroup aggregation)."""
    if len(ledgers) != len(weights):
        raise ValueError("one weight per ledger required")
    scalar_fields = (
        "cost_direct_medical",
        "cost_productivity",
        "cost_out_of_pocket",
        "qalys",
        "cost_direct_medical_undiscounted",
        "cost_productivity_undiscounted",
        "cost_out_of_pocket_undiscounted",
        "qalys_undiscounted",
    )
    totals = {
        f: sum(w * getattr(led, f) for led, w in zip(ledgers, weights))
        for f in scalar_fields
    }
    breakdown = None
    if all(led.per_cycle_breakdown is not None for led in ledgers):
        parts = {}
        for comp in ("direct_medical", "productivity", "out_of_pocket", "qalys"):
            parts[comp] = sum(
                w * getattr(led.per_cycle_breakdown, comp)
                for led, w in zip(ledgers, weights)
            )
        breakdown = PerCycleBreakdown(**parts)
    return OutcomeLedger(**totals, per_cycle_breakdown=breakdown)
