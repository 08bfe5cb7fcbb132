"""Distributional cost-effectiveness: equity weights and the equity plane.

Subgroup health gains are up-weighted by how far each subgroup's baseline
health sits below a reference level, using weights of the form
(reference / baseline)^aversion. At aversion 0 every weight is 1 and the
analysis collapses to standard population-aggregated CEA.

The equity plane pairs each PSA iteration's net health benefit with its
equity impact, measured as the reduction in the population-share-weighted
Atkinson inequality index of subgroup health levels (same aversion as the
weights; positive = inequality reduced). The inequality measured here is
total inter-subgroup inequality, with no fair/unfair decomposition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

from .config import POPULATION_MEAN, Subgroup
from .metrics import SOCIETAL, Perspective
from .psa import PsaBundle


@dataclass(frozen=True)
class EquityWeights:
    """Atkinson-style equity weights, one per subgroup, with their shares."""

    epsilon: float
    reference_health: float
    weights: Mapping[str, float]
    shares: Mapping[str, float]


@dataclass(frozen=True)
class EquityPlanePoint:
    """One PSA iteration on the equity impact plane."""

    net_health_benefit: float
    equity_impact: float


def atkinson_weights(
    subgroups: Sequence[Subgroup],
    epsilon: float,
    reference: Union[float, str] = POPULATION_MEAN,
) -> EquityWeights:
    """Weights (reference / baseline_health)^epsilon per subgroup.

    `reference` is either a positive health level or "population-mean",
    which resolves to the population-share-weighted mean baseline health.
    """
    if epsilon < 0:
        raise ValueError(f"inequality aversion must be >= 0, got {epsilon}")
    for g in subgroups:
        if not g.baseline_health > 0:
            raise ValueError(f"subgroup {g.name!r} has baseline_health <= 0")
    if isinstance(reference, str):
        if reference != POPULATION_MEAN:
            raise ValueError(f"unknown reference sentinel {reference!r}")
        reference_value = sum(g.population_share * g.baseline_health for g in subgroups)
    else:
        reference_value = float(reference)
        if not reference_value > 0:
            raise ValueError(f"reference health must be > 0, got {reference_value}")
    return EquityWeights(
        epsilon=epsilon,
        reference_health=reference_value,
        weights={
            g.name: (reference_value / g.baseline_health) ** epsilon for g in subgroups
        },
        shares={g.name: g.population_share for g in subgroups},
    )


def equity_weighted_nmb(
    subgroup_increments: Mapping[str, tuple[float, float]],
    weights: EquityWeights,
    wtp: float,
) -> float:
    """Equity-weighted incremental net monetary benefit.

    `subgroup_increments` maps subgroup name to the per-capita-within-subgroup
    (delta QALYs, delta cost) pair; each term is scaled by population share
    before summation, so the result is per capita at population level.
    """
    total = 0.0
    for name, (d_qalys, d_cost) in subgroup_increments.items():
        if name not in weights.weights:
            raise KeyError(f"no equity weight for subgroup {name!r}")
        total += weights.shares[name] * weights.weights[name] * (d_qalys * wtp - d_cost)
    return total


def aggregate_unweighted_nmb(
    subgroup_increments: Mapping[str, tuple[float, float]],
    shares: Mapping[str, float],
    wtp: float,
) -> float:
    """Population-aggregated incremental NMB with no equity weighting.

    This is the aversion-zero reference point: equity_weighted_nmb with
    epsilon 0 equals it exactly, term for term.
    """
    total = 0.0
    for name, (d_qalys, d_cost) in subgroup_increments.items():
        total += shares[name] * (d_qalys * wtp - d_cost)
    return total


def atkinson_index(
    levels: Sequence[float], shares: Sequence[float], epsilon: float
) -> float:
    """Share-weighted Atkinson inequality index of positive health levels.

    Zero means perfect equality; positive values grow with dispersion and
    with the aversion parameter. Aversion 1 uses the geometric-mean form.
    """
    x = np.asarray(levels, dtype=float)
    w = np.asarray(shares, dtype=float)
    if np.any(x <= 0):
        raise ValueError("Atkinson index requires strictly positive levels")
    w = w / w.sum()
    mean = float(w @ x)
    if epsilon == 1.0:
        ede = math.exp(float(w @ np.log(x)))
    else:
        ede = float(w @ np.power(x, 1.0 - epsilon)) ** (1.0 / (1.0 - epsilon))
    return 1.0 - ede / mean


def equity_plane(
    bundle: PsaBundle,
    wtp: float,
    epsilon: float,
    perspective: Perspective = SOCIETAL,
) -> list[EquityPlanePoint]:
    """Per-iteration equity plane coordinates for the intervention.

    Net health benefit is the population delta QALYs minus delta cost valued
    at the threshold; equity impact is the drop in the Atkinson index of
    subgroup health (baseline versus baseline plus per-capita QALY gain).
    """
    if len(bundle.subgroup_names) < 2:
        raise ValueError(
            "equity plane needs at least two subgroups; "
            "add subgroups to the model configuration"
        )
    if not wtp > 0:
        raise ValueError("net health benefit requires a positive threshold")
    new = bundle.strategy_index(bundle.intervention_name())
    comp = bundle.strategy_index(bundle.comparator)
    shares = np.asarray(bundle.subgroup_shares)
    baseline = np.asarray(bundle.subgroup_baseline_health)

    d_qalys = bundle.qalys()[:, new, :] - bundle.qalys()[:, comp, :]  # (N, G)
    cost = bundle.cost(perspective)
    d_cost = cost[:, new, :] - cost[:, comp, :]

    pre_index = atkinson_index(baseline, shares, epsilon)
    points = []
    for i in range(bundle.iterations):
        nhb = float(shares @ (d_qalys[i] - d_cost[i] / wtp))
        post_levels = baseline + d_qalys[i]
        post_index = atkinson_index(post_levels, shares, epsilon)
        points.append(
            EquityPlanePoint(
                net_health_benefit=nhb, equity_impact=-(post_index - pre_index)
            )
        )
    return points


def write_equity_plane_csv(points: Sequence[EquityPlanePoint], path) -> None:
    """Emit `equity_plane.csv`: iteration, net_health_benefit, equity_impact."""
    from pathlib import Path

    lines = ["iteration,net_health_benefit,equity_impact"]
    for i, p in enumerate(points):
        lines.append(f"{i},{p.net_health_benefit!r},{p.equity_impact!r}")
    Path(path).write_text("\n".join(lines) + "\n")
