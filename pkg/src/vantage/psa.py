"""Probabilistic sensitivity analysis: seeded sampling and the PSA bundle.

Every iteration draws one joint parameter assignment and runs every strategy
and subgroup under it (common random parameters, so incremental outcomes are
meaningful). The random stream for iteration i is derived from
(master_seed, i) alone, which makes the bundle independent of execution
order: serial, reversed, and parallel runs produce identical results.

The resulting :class:`PsaBundle` is the single artifact every downstream
analysis consumes: CEAC, cost-effectiveness plane, value of information,
value of perspective, and the equity plane.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence, Union

import numpy as np

from . import config as cfg
from .config import DistributionSpec, ModelSpec, apply_parameter_values, spec_digest
from .markov import OutcomeLedger, run_strategy
from .metrics import NMB_TIE_TOL, Perspective

COMP_DIRECT, COMP_PROD, COMP_OOP, COMP_QALYS = 0, 1, 2, 3

OverrideValue = Union[float, tuple]


@dataclass(frozen=True)
class ParameterDraw:
    """One joint draw: expanded scalar columns plus the path assignment."""

    names: tuple[str, ...]
    values: np.ndarray
    assignment: Mapping[str, OverrideValue]


@dataclass(frozen=True)
class PsaBundle:
    """Per-iteration outcomes for every strategy x subgroup, plus samples.

    `outcomes` and `outcomes_undiscounted` have shape (N, K, G, 4) with the
    last axis ordered (direct medical, productivity, out-of-pocket, QALYs);
    entries are discounted (resp. undiscounted) per-person values.
    """

    iterations: int
    parameter_names: tuple[str, ...]
    sampled_parameters: np.ndarray  # (N, P)
    strategy_names: tuple[str, ...]
    comparator: str
    subgroup_names: tuple[str, ...]
    subgroup_shares: tuple[float, ...]
    subgroup_baseline_health: tuple[float, ...]
    outcomes: np.ndarray
    outcomes_undiscounted: np.ndarray
    master_seed: int
    spec_digest: str

    @property
    def n_strategies(self) -> int:
        return len(self.strategy_names)

    def strategy_index(self, name: str) -> int:
        return self.strategy_names.index(name)

    def intervention_name(self) -> str:
        others = [n for n in self.strategy_names if n != self.comparator]
        if len(others) != 1:
            raise ValueError("this analysis requires exactly two strategies")
        return others[0]

    def cost(self, perspective: Perspective) -> np.ndarray:
        """Perspective-filtered discounted cost, shape (N, K, G)."""
        total = np.zeros(self.outcomes.shape[:3])
        if "direct_medical" in perspective.included_components:
            total = total + self.outcomes[..., COMP_DIRECT]
        if "productivity" in perspective.included_components:
            total = total + self.outcomes[..., COMP_PROD]
        if "out_of_pocket" in perspective.included_components:
            total = total + self.outcomes[..., COMP_OOP]
        return total

    def qalys(self) -> np.ndarray:
        return self.outcomes[..., COMP_QALYS]

    def aggregate_cost(self, perspective: Perspective) -> np.ndarray:
        """Population per-capita discounted cost, shape (N, K)."""
        shares = np.asarray(self.subgroup_shares)
        return self.cost(perspective) @ shares

    def aggregate_qalys(self) -> np.ndarray:
        shares = np.asarray(self.subgroup_shares)
        return self.qalys() @ shares

    def nmb(self, wtp: float, perspective: Perspective) -> np.ndarray:
        """Population per-capita NMB per iteration and strategy, shape (N, K)."""
        return self.aggregate_qalys() * wtp - self.aggregate_cost(perspective)

    def ledger(self, iteration: int, strategy: str, subgroup: str) -> OutcomeLedger:
        k = self.strategy_names.index(strategy)
        g = self.subgroup_names.index(subgroup)
        d = self.outcomes[iteration, k, g]
        u = self.outcomes_undiscounted[iteration, k, g]
        return OutcomeLedger(
            cost_direct_medical=float(d[COMP_DIRECT]),
            cost_productivity=float(d[COMP_PROD]),
            cost_out_of_pocket=float(d[COMP_OOP]),
            qalys=float(d[COMP_QALYS]),
            cost_direct_medical_undiscounted=float(u[COMP_DIRECT]),
            cost_productivity_undiscounted=float(u[COMP_PROD]),
            cost_out_of_pocket_undiscounted=float(u[COMP_OOP]),
            qalys_undiscounted=float(u[COMP_QALYS]),
        )


def parameter_columns(spec: ModelSpec) -> tuple[str, ...]:
    """Scalar column names for the sampled-parameter matrix.

    Scalar targets contribute their own path; a dirichlet-row target expands
    to one column per destination state, `<path>.<to_state>`.
    """
    names: list[str] = []
    for d in spec.psa.distributions:
        if d.kind == "dirichlet-row":
            names.extend(f"{d.target}.{s}" for s in spec.state_names)
        else:
            names.append(d.target)
    return tuple(names)


def _iteration_rng(master_seed: int, iteration_index: int) -> np.random.Generator:
    """Counter-style substream: a function of (master_seed, index) only."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=(master_seed, iteration_index))
    )


def _scalar_domain(spec: ModelSpec, target: str) -> tuple[float, float]:
    rp = cfg.resolve_parameter_path(spec, target)
    if rp.kind == "state_field" and rp.field_name == "utility":
        return (0.0, 1.0)
    return (0.0, np.inf)


def _draw_scalar(rng: np.random.Generator, d: DistributionSpec) -> float:
    p = d.parameters
    if d.kind == "beta":
        return float(rng.beta(p["alpha"], p["beta"]))
    if d.kind == "gamma":
        return float(rng.gamma(p["shape"], p["scale"]))
    if d.kind == "normal":
        return float(rng.normal(p["mean"], p["sd"]))
    if d.kind == "lognormal":
        return float(rng.lognormal(p["mu"], p["sigma"]))
    if d.kind == "uniform":
        return float(rng.uniform(p["low"], p["high"]))
    raise ValueError(f"unsupported scalar distribution kind {d.kind!r}")


def _draw_row(
    rng: np.random.Generator, d: DistributionSpec, base_row: Sequence[float]
) -> tuple[float, ...]:
    """Dirichlet draw over the positive entries of the base row.

    Concentration is base probability times the user precision; structural
    zeros stay zero. The draw is renormalized to sum exactly 1.
    """
    base = np.asarray(base_row, dtype=float)
    positive = base > 0
    alpha = base[positive] * d.parameters["precision"]
    sampled = rng.dirichlet(alpha)
    row = np.zeros_like(base)
    row[positive] = sampled
    row = row / row.sum()
    if np.any(row < 0) or np.any(row > 1) or abs(row.sum() - 1.0) > cfg.ROW_SUM_TOL:
        raise ValueError(
            f"sampled transition row for {d.target!r} is not row-stochastic; "
            "the distribution spec is degenerate"
        )
    return tuple(float(v) for v in row)


def sample_parameters(spec: ModelSpec, iteration_index: int) -> ParameterDraw:
    """One joint draw for the given iteration, deterministic in (seed, index).

    Draws happen in the order distributions are declared. Scalar draws from
    unbounded kinds (normal, uniform) are clipped to the target's valid
    domain: utilities to [0,1], costs to [0, inf).
    """
    if not 0 <= iteration_index < spec.psa.iterations:
        raise ValueError(
            f"iteration_index {iteration_index} outside [0, {spec.psa.iterations})"
        )
    rng = _iteration_rng(spec.psa.seed, iteration_index)
    names: list[str] = []
    values: list[float] = []
    assignment: dict[str, OverrideValue] = {}
    for d in spec.psa.distributions:
        if d.kind == "dirichlet-row":
            base_row = cfg.read_parameter(spec, d.target)
            row = _draw_row(rng, d, base_row)  # type: ignore[arg-type]
            assignment[d.target] = row
            names.extend(f"{d.target}.{s}" for s in spec.state_names)
            values.extend(row)
        else:
            lo, hi = _scalar_domain(spec, d.target)
            v = float(np.clip(_draw_scalar(rng, d), lo, hi))
            assignment[d.target] = v
            names.append(d.target)
            values.append(v)
    return ParameterDraw(
        names=tuple(names), values=np.array(values), assignment=assignment
    )


def _simulate_iteration(
    spec: ModelSpec,
    subgroup_views: Sequence[ModelSpec],
    iteration_index: int,
) -> tuple[ParameterDraw, np.ndarray, np.ndarray]:
    """Outcome block for one iteration: arrays of shape (K, G, 4)."""
    draw = sample_parameters(spec, iteration_index)
    n_strat, n_sub = len(spec.strategies), len(spec.subgroups)
    disc = np.empty((n_strat, n_sub, 4))
    undisc = np.empty((n_strat, n_sub, 4))
    for g, view in enumerate(subgroup_views):
        sampled_view = (
            apply_parameter_values(view, draw.assignment) if draw.assignment else view
        )
        for k, strategy in enumerate(spec.strategies):
            _, led = run_strategy(sampled_view, strategy)
            disc[k, g] = (
                led.cost_direct_medical,
                led.cost_productivity,
                led.cost_out_of_pocket,
                led.qalys,
            )
            undisc[k, g] = (
                led.cost_direct_medical_undiscounted,
                led.cost_productivity_undiscounted,
                led.cost_out_of_pocket_undiscounted,
                led.qalys_undiscounted,
            )
    return draw, disc, undisc


def run_psa(spec: ModelSpec) -> PsaBundle:
    """Run the full Monte Carlo plan and assemble the bundle.

    Engine errors are re-raised annotated with the failing iteration index.
    """
    n = spec.psa.iterations
    columns = parameter_columns(spec)
    subgroup_views = [cfg.resolve_subgroup_spec(spec, g) for g in spec.subgroups]
    sampled = np.empty((n, len(columns)))
    n_strat, n_sub = len(spec.strategies), len(spec.subgroups)
    outcomes = np.empty((n, n_strat, n_sub, 4))
    undiscounted = np.empty((n, n_strat, n_sub, 4))
    for i in range(n):
        try:
            draw, disc, undisc = _simulate_iteration(spec, subgroup_views, i)
        except Exception as exc:
            raise RuntimeError(f"PSA iteration {i} failed: {exc}") from exc
        sampled[i] = draw.values
        outcomes[i] = disc
        undiscounted[i] = undisc
    return PsaBundle(
        iterations=n,
        parameter_names=columns,
        sampled_parameters=sampled,
        strategy_names=spec.strategy_names,
        comparator=spec.comparator().name,
        subgroup_names=spec.subgroup_names,
        subgroup_shares=tuple(g.population_share for g in spec.subgroups),
        subgroup_baseline_health=tuple(g.baseline_health for g in spec.subgroups),
        outcomes=outcomes,
        outcomes_undiscounted=undiscounted,
        master_seed=spec.psa.seed,
        spec_digest=spec_digest(spec),
    )


def choose_strategies(nmb_matrix: np.ndarray, comparator_index: int) -> np.ndarray:
    """Vectorized decision rule over an (N, K) NMB matrix.

    Matches `metrics.decide`: the comparator wins whenever it is within
    1e-9 of the best NMB; otherwise the first strategy attaining the max.
    """
    best = nmb_matrix.max(axis=1)
    chosen = nmb_matrix.argmax(axis=1)
    comparator_wins = nmb_matrix[:, comparator_index] >= best - NMB_TIE_TOL
    return np.where(comparator_wins, comparator_index, chosen)


@dataclass(frozen=True)
class CeacTable:
    """Probability each strategy is NMB-optimal, per threshold."""

    wtp_grid: tuple[float, ...]
    strategy_names: tuple[str, ...]
    probabilities: np.ndarray  # (len(grid), K)


def ceac(
    bundle: PsaBundle, perspective: Perspective, lambda_grid: Sequence[float]
) -> CeacTable:
    """Cost-effectiveness acceptability curve over a threshold grid."""
    if len(lambda_grid) == 0:
        raise ValueError("lambda_grid must be nonempty")
    comp_idx = bundle.strategy_index(bundle.comparator)
    qalys = bundle.aggregate_qalys()
    cost = bundle.aggregate_cost(perspective)
    probs = np.empty((len(lambda_grid), bundle.n_strategies))
    for li, wtp in enumerate(lambda_grid):
        chosen = choose_strategies(qalys * wtp - cost, comp_idx)
        for k in range(bundle.n_strategies):
            probs[li, k] = np.mean(chosen == k)
    return CeacTable(
        wtp_grid=tuple(float(v) for v in lambda_grid),
        strategy_names=bundle.strategy_names,
        probabilities=probs,
    )


@dataclass(frozen=True)
class CePlaneResult:
    """Incremental scatter for one perspective plus the between-perspective shift.

    `points` pairs (delta QALYs, delta cost) per iteration for the requested
    perspective; `delta_points` is the societal-minus-health-system shift of
    the same pairs (the QALY coordinate is identically zero because effects
    are perspective-invariant).
    """

    perspective: str
    points: np.ndarray  # (N, 2)
    delta_points: np.ndarray  # (N, 2)


def ce_plane_points(bundle: PsaBundle, perspective: Perspective) -> CePlaneResult:
    """Per-iteration (dE, dC) cloud of the intervention versus the comparator."""
    from .metrics import HEALTH_SYSTEM, SOCIETAL

    new = bundle.strategy_index(bundle.intervention_name())
    comp = bundle.strategy_index(bundle.comparator)
    qalys = bundle.aggregate_qalys()
    d_effect = qalys[:, new] - qalys[:, comp]

    def d_cost(p: Perspective) -> np.ndarray:
        c = bundle.aggregate_cost(p)
        return c[:, new] - c[:, comp]

    points = np.column_stack([d_effect, d_cost(perspective)])
    delta_points = np.column_stack(
        [np.zeros_like(d_effect), d_cost(SOCIETAL) - d_cost(HEALTH_SYSTEM)]
    )
    return CePlaneResult(
        perspective=perspective.name, points=points, delta_points=delta_points
    )


@dataclass(frozen=True)
class DeltaNmbResult:
    """Distribution of the societal-minus-health-system incremental NMB."""

    wtp: float
    series: np.ndarray  # (N,)
    mean: float
    quantiles: Mapping[float, float]  # keys 2.5, 25, 50, 75, 97.5


def delta_nmb_distribution(bundle: PsaBundle, wtp: float) -> DeltaNmbResult:
    """Per-iteration societal bonus of the intervention-vs-comparator increment.

    Because QALYs are perspective-invariant, each entry equals minus the
    incremental productivity plus out-of-pocket cost.
    """
    from .metrics import HEALTH_SYSTEM, SOCIETAL

    new = bundle.strategy_index(bundle.intervention_name())
    comp = bundle.strategy_index(bundle.comparator)
    nmb_soc = bundle.nmb(wtp, SOCIETAL)
    nmb_hs = bundle.nmb(wtp, HEALTH_SYSTEM)
    series = (nmb_soc[:, new] - nmb_soc[:, comp]) - (
        nmb_hs[:, new] - nmb_hs[:, comp]
    )
    qs = (2.5, 25.0, 50.0, 75.0, 97.5)
    values = np.percentile(series, qs)
    return DeltaNmbResult(
        wtp=wtp,
        series=series,
        mean=float(series.mean()),
        quantiles={q: float(v) for q, v in zip(qs, values)},
    )


def samples_csv_columns(bundle: PsaBundle) -> list[str]:
    cols = ["iteration", *bundle.parameter_names]
    for strategy in bundle.strategy_names:
        for subgroup in bundle.subgroup_names:
            prefix = f"{strategy}.{subgroup}"
            cols.extend(
                [
                    f"{prefix}.cost_direct",
                    f"{prefix}.cost_prod",
                    f"{prefix}.cost_oop",
                    f"{prefix}.qalys",
                ]
            )
    return cols


def write_samples_csv(bundle: PsaBundle, path: Union[str, Path]) -> None:
    """Emit the per-iteration contract file `psa_samples.csv`.

    Floats are written with shortest round-trip formatting, so re-parsing
    the file reproduces the bundle values bit for bit.
    """
    lines = [",".join(samples_csv_columns(bundle))]
    for i in range(bundle.iterations):
        cells = [str(i)]
        cells.extend(repr(float(v)) for v in bundle.sampled_parameters[i])
        for k in range(len(bundle.strategy_names)):
            for g in range(len(bundle.subgroup_names)):
                cells.extend(repr(float(v)) for v in bundle.outcomes[i, k, g])
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def scale_perspective_gap(bundle: PsaBundle, factor: float) -> PsaBundle:
    """Bundle with productivity and out-of-pocket components scaled by `factor`.

    Utility for sensitivity work: shrinking the factor toward zero collapses
    the societal perspective onto the health-system perspective.
    """
    outcomes = bundle.outcomes.copy()
    undisc = bundle.outcomes_undiscounted.copy()
    for comp in (COMP_PROD, COMP_OOP):
        outcomes[..., comp] *= factor
        undisc[..., comp] *= factor
    return replace(bundle, outcomes=outcomes, outcomes_undiscounted=undisc)
