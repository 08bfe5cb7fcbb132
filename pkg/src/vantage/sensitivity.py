"""Deterministic sensitivity analysis: tornado tables and Sobol indices.

The tornado re-runs the deterministic model at the low and high end of each
parameter's range, all others held at base, and reports the swing in the
intervention's incremental NMB. When no ranges are given, each scalar PSA
target gets +/-20% of its base value, truncated to the valid domain; this
default is a convention, not data, and should be replaced with evidence-based
ranges for real analyses.

Sobol indices use Saltelli-style paired matrices drawn from a seeded
low-discrepancy sequence, with Jansen estimators for first-order and total
effects and bootstrap standard errors. The model output attributed to each
parameter is the deterministic incremental NMB; one sample point costs one
cohort evaluation per strategy and subgroup.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np
from scipy import stats
from scipy.stats import qmc

from . import config as cfg
from .config import DistributionSpec, ModelSpec, apply_parameter_values
from .markov import run_strategy
from .metrics import SOCIETAL, Perspective

CLAMP_LOW, CLAMP_HIGH = -0.05, 1.05


@dataclass(frozen=True)
class TornadoEntry:
    """One-way swing of the incremental NMB over a parameter's range."""

    parameter: str
    low_value: float
    high_value: float
    outcome_at_low: float
    outcome_at_high: float

    @property
    def bar_width(self) -> float:
        return abs(self.outcome_at_high - self.outcome_at_low)


@dataclass(frozen=True)
class SobolResult:
    """First- and total-order indices with bootstrap noise estimates.

    Reported indices are clamped into [-0.05, 1.05]; `flagged` marks
    parameters whose raw estimate fell outside that band (treat as noise).
    """

    parameter_names: tuple[str, ...]
    first_order: np.ndarray
    total_order: np.ndarray
    noise_first: np.ndarray
    noise_total: np.ndarray
    sample_size: int
    flagged: tuple[bool, ...]


def _subgroup_views(spec: ModelSpec) -> list[ModelSpec]:
    return [cfg.resolve_subgroup_spec(spec, g) for g in spec.subgroups]


def incremental_nmb(
    spec: ModelSpec,
    wtp: Optional[float] = None,
    perspective: Perspective = SOCIETAL,
    assignment: Optional[Mapping[str, object]] = None,
    _views: Optional[Sequence[ModelSpec]] = None,
) -> float:
    """Population incremental NMB of the single intervention vs the comparator.

    Subgroup results are population-share weighted. `assignment` optionally
    perturbs parameters (dotted paths) before evaluation.
    """
    interventions = spec.interventions()
    if len(interventions) != 1:
        raise ValueError("incremental analysis requires exactly one intervention")
    wtp = spec.wtp_threshold if wtp is None else wtp
    comparator = spec.comparator()
    views = _views if _views is not None else _subgroup_views(spec)
    total = 0.0
    for g, view in zip(spec.subgroups, views):
        v = apply_parameter_values(view, assignment) if assignment else view
        _, led_comp = run_strategy(v, comparator)
        _, led_new = run_strategy(v, interventions[0])
        d_qalys = led_new.qalys - led_comp.qalys
        d_cost = perspective.cost(led_new) - perspective.cost(led_comp)
        total += g.population_share * (d_qalys * wtp - d_cost)
    return total


def default_tornado_ranges(spec: ModelSpec) -> dict[str, tuple[float, float]]:
    """+/-20% of base value for every scalar PSA target, domain-truncated."""
    ranges: dict[str, tuple[float, float]] = {}
    for d in spec.psa.distributions:
        if d.kind == "dirichlet-row":
            continue
        base = cfg.read_parameter(spec, d.target)
        assert isinstance(base, float)
        low, high = 0.8 * base, 1.2 * base
        rp = cfg.resolve_parameter_path(spec, d.target)
        if rp.kind == "state_field" and rp.field_name == "utility":
            high = min(high, 1.0)
        low = max(low, 0.0)
        ranges[d.target] = (low, high)
    return ranges


def tornado(
    spec: ModelSpec,
    parameter_ranges: Optional[Mapping[str, tuple[float, float]]] = None,
    wtp: Optional[float] = None,
    perspective: Perspective = SOCIETAL,
) -> list[TornadoEntry]:
    """One-way sensitivity table, widest swing first."""
    if parameter_ranges is None:
        parameter_ranges = default_tornado_ranges(spec)
    views = _subgroup_views(spec)
    entries = []
    for name, (low, high) in parameter_ranges.items():
        if low > high:
            raise ValueError(f"{name!r}: range low {low} exceeds high {high}")
        outcome_low = incremental_nmb(
            spec, wtp, perspective, assignment={name: low}, _views=views
        )
        outcome_high = incremental_nmb(
            spec, wtp, perspective, assignment={name: high}, _views=views
        )
        entries.append(
            TornadoEntry(
                parameter=name,
                low_value=low,
                high_value=high,
                outcome_at_low=outcome_low,
                outcome_at_high=outcome_high,
            )
        )
    entries.sort(key=lambda e: e.bar_width, reverse=True)
    return entries


def write_tornado_csv(entries: Sequence[TornadoEntry], path: Union[str, Path]) -> None:
    lines = ["parameter,low,high,outcome_low,outcome_high"]
    for e in entries:
        lines.append(
            f"{e.parameter},{e.low_value!r},{e.high_value!r},"
            f"{e.outcome_at_low!r},{e.outcome_at_high!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Sobol variance decomposition
# ---------------------------------------------------------------------------


def quantile_transform(d: DistributionSpec) -> Callable[[np.ndarray], np.ndarray]:
    """Map uniform(0,1) draws to the distribution's values via its quantile function."""
    p = d.parameters
    if d.kind == "beta":
        return lambda u: stats.beta.ppf(u, p["alpha"], p["beta"])
    if d.kind == "gamma":
        return lambda u: stats.gamma.ppf(u, p["shape"], scale=p["scale"])
    if d.kind == "normal":
        return lambda u: stats.norm.ppf(u, loc=p["mean"], scale=p["sd"])
    if d.kind == "lognormal":
        return lambda u: stats.lognorm.ppf(u, p["sigma"], scale=np.exp(p["mu"]))
    if d.kind == "uniform":
        return lambda u: p["low"] + u * (p["high"] - p["low"])
    raise ValueError(f"no quantile transform for kind {d.kind!r}")


def sobol_estimate(
    func: Callable[[np.ndarray], np.ndarray],
    transforms: Sequence[Callable[[np.ndarray], np.ndarray]],
    base_samples: int,
    seed: int = 0,
    n_boot: int = 100,
    parameter_names: Optional[Sequence[str]] = None,
) -> SobolResult:
    """Jansen first/total-order indices from Saltelli paired matrices.

    `func` maps an (n, P) matrix of parameter values to n outputs.
    `base_samples` is rounded up to the next power of two to keep the
    low-discrepancy base sequence balanced.
    """
    n_params = len(transforms)
    if n_params < 1:
        raise ValueError("at least one parameter required")
    if base_samples < 64:
        raise ValueError(f"base_samples must be >= 64, got {base_samples}")
    m = int(np.ceil(np.log2(base_samples)))
    n = 2**m
    sampler = qmc.Sobol(d=2 * n_params, scramble=True, seed=seed)
    u = sampler.random_base2(m)
    # Keep quantile transforms away from the exact endpoints.
    u = np.clip(u, 1e-12, 1 - 1e-12)
    u_a, u_b = u[:, :n_params], u[:, n_params:]

    def to_values(block: np.ndarray) -> np.ndarray:
        cols = [transforms[j](block[:, j]) for j in range(n_params)]
        return np.column_stack(cols)

    x_a, x_b = to_values(u_a), to_values(u_b)
    y_a, y_b = np.asarray(func(x_a), dtype=float), np.asarray(func(x_b), dtype=float)
    y_ab = np.empty((n_params, n))
    for j in range(n_params):
        x_abj = x_a.copy()
        x_abj[:, j] = x_b[:, j]
        y_ab[j] = func(x_abj)
    for label, y in (("A", y_a), ("B", y_b)):
        if not np.all(np.isfinite(y)):
            bad = int(np.flatnonzero(~np.isfinite(y))[0])
            raise ValueError(f"non-finite model output at {label} sample {bad}")
    if not np.all(np.isfinite(y_ab)):
        j, i = map(int, np.argwhere(~np.isfinite(y_ab))[0])
        raise ValueError(f"non-finite model output at AB[{j}] sample {i}")

    def indices(idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        ya, yb, yab = y_a[idx], y_b[idx], y_ab[:, idx]
        variance = np.var(np.concatenate([ya, yb]))
        first = 1.0 - np.mean((yb - yab) ** 2, axis=1) / (2.0 * variance)
        total = np.mean((ya - yab) ** 2, axis=1) / (2.0 * variance)
        return first, total

    all_rows = np.arange(n)
    first, total = indices(all_rows)

    rng = np.random.default_rng(seed)
    boot_first = np.empty((n_boot, n_params))
    boot_total = np.empty((n_boot, n_params))
    for b in range(n_boot):
        idx = rng.integers(0, n, size=n)
        boot_first[b], boot_total[b] = indices(idx)
    noise_first = boot_first.std(axis=0)
    noise_total = boot_total.std(axis=0)

    flagged = tuple(
        bool(f < CLAMP_LOW or f > CLAMP_HIGH or t < CLAMP_LOW or t > CLAMP_HIGH)
        for f, t in zip(first, total)
    )
    names = tuple(parameter_names) if parameter_names else tuple(
        f"x{j + 1}" for j in range(n_params)
    )
    return SobolResult(
        parameter_names=names,
        first_order=np.clip(first, CLAMP_LOW, CLAMP_HIGH),
        total_order=np.clip(total, CLAMP_LOW, CLAMP_HIGH),
        noise_first=noise_first,
        noise_total=noise_total,
        sample_size=n,
        flagged=flagged,
    )


def sobol_indices(
    spec: ModelSpec,
    base_samples: int,
    wtp: Optional[float] = None,
    perspective: Perspective = SOCIETAL,
    seed: Optional[int] = None,
    n_boot: int = 100,
) -> SobolResult:
    """Variance decomposition of the incremental NMB over the PSA distributions.

    Only scalar distributions enter the decomposition; dirichlet-row targets
    are held at their base rows.
    """
    scalars = [d for d in spec.psa.distributions if d.kind != "dirichlet-row"]
    if not scalars:
        raise ValueError("Sobol analysis needs at least one scalar distribution")
    transforms = [quantile_transform(d) for d in scalars]
    targets = [d.target for d in scalars]
    domains = [
        (0.0, 1.0)
        if cfg.resolve_parameter_path(spec, t).field_name == "utility"
        else (0.0, np.inf)
        for t in targets
    ]
    views = _subgroup_views(spec)

    def model(x: np.ndarray) -> np.ndarray:
        out = np.empty(x.shape[0])
        for i, row in enumerate(x):
            assignment = {
                t: float(np.clip(v, lo, hi))
                for t, v, (lo, hi) in zip(targets, row, domains)
            }
            out[i] = incremental_nmb(spec, wtp, perspective, assignment, _views=views)
        return out

    return sobol_estimate(
        model,
        transforms,
        base_samples,
        seed=spec.psa.seed if seed is None else seed,
        n_boot=n_boot,
        parameter_names=targets,
    )


def write_sobol_csv(result: SobolResult, path: Union[str, Path]) -> None:
    lines = ["parameter,first_order,total_order,noise"]
    for j, name in enumerate(result.parameter_names):
        noise = max(result.noise_first[j], result.noise_total[j])
        lines.append(
            f"{name},{float(result.first_order[j])!r},"
            f"{float(result.total_order[j])!r},{float(noise)!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n")
