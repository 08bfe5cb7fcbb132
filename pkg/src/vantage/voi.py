"""Value of information (EVPI, EVPPI) and value of perspective.

EVPI is the gap between deciding after seeing each parameter draw and
deciding once on expected net benefit. EVPPI restricts perfect information
to a parameter subset, estimated here with a single-loop regression
metamodel: per-strategy NMB is regressed on a degree-2 polynomial basis
(with interactions) of the subset, and the EVPI formula is applied to the
fitted values.

Value of perspective quantifies the societal net benefit forgone when the
health-system perspective picks a different strategy than the societal
optimum: a deterministic loss at base parameters, and its expectation over
the PSA distribution. Both use the comparator-favoring tie rule of
`metrics.decide`, so degenerate bundles are stable.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Mapping, Optional, Sequence

import numpy as np

from .equity import EquityWeights
from .markov import OutcomeLedger
from .metrics import HEALTH_SYSTEM, SOCIETAL, Perspective, decide
from .psa import PsaBundle, choose_strategies


@dataclass(frozen=True)
class EvpiResult:
    """Per-person and population EVPI plus per-subset EVPPI estimates."""

    evpi_per_person: float
    population_size: Optional[float]
    population_evpi: Optional[float]
    evppi_by_parameter_set: Mapping[str, float]


@dataclass(frozen=True)
class VopResult:
    """Deterministic and probabilistic value of perspective."""

    deterministic_loss: Optional[float]
    evop: float
    per_iteration_losses: np.ndarray
    discordance_probability: float


def _equity_nmb_matrix(
    bundle: PsaBundle, wtp: float, perspective: Perspective, equity: EquityWeights
) -> np.ndarray:
    """Population NMB per iteration/strategy with equity-weighted aggregation."""
    agg = np.array(
        [
            equity.shares[name] * equity.weights[name]
            for name in bundle.subgroup_names
        ]
    )
    return (bundle.qalys() * wtp - bundle.cost(perspective)) @ agg


def _nmb_matrix(
    bundle: PsaBundle,
    wtp: float,
    perspective: Perspective,
    equity: Optional[EquityWeights] = None,
) -> np.ndarray:
    if equity is not None:
        return _equity_nmb_matrix(bundle, wtp, perspective, equity)
    return bundle.nmb(wtp, perspective)


def evpi(
    bundle: PsaBundle,
    wtp: float,
    perspective: Perspective,
    equity: Optional[EquityWeights] = None,
) -> float:
    """Expected value of removing all parameter uncertainty, per person."""
    if bundle.iterations < 2:
        raise ValueError("EVPI needs at least two iterations")
    nmb = _nmb_matrix(bundle, wtp, perspective, equity)
    value = float(nmb.max(axis=1).mean() - nmb.mean(axis=0).max())
    return max(0.0, value)


def population_evpi(evpi_per_person: float, population: float) -> float:
    """Scale per-person EVPI by the affected population size."""
    if population < 0:
        raise ValueError(f"population must be >= 0, got {population}")
    return evpi_per_person * population


def _polynomial_basis(x: np.ndarray, degree: int) -> np.ndarray:
    """Design matrix: intercept, standardized columns, and degree-2 products.

    Constant columns are dropped before expansion (they carry no
    information and would break standardization).
    """
    sd = x.std(axis=0)
    keep = sd > 0
    x = (x[:, keep] - x[:, keep].mean(axis=0)) / sd[keep]
    n, p = x.shape
    columns = [np.ones(n)]
    columns.extend(x[:, j] for j in range(p))
    if degree >= 2:
        for j, k in combinations_with_replacement(range(p), 2):
            columns.append(x[:, j] * x[:, k])
    return np.column_stack(columns)


def evppi(
    bundle: PsaBundle,
    parameter_subset: Sequence[str],
    wtp: float,
    perspective: Perspective,
    equity: Optional[EquityWeights] = None,
    degree: int = 2,
) -> float:
    """Expected value of perfect information on a subset of parameters.

    Single-loop regression estimator: fit each strategy's NMB on the
    polynomial basis of the subset, then apply the EVPI formula to the
    fitted values. The estimate is clamped below at zero.
    """
    if not parameter_subset:
        raise ValueError("parameter subset must be nonempty")
    missing = [p for p in parameter_subset if p not in bundle.parameter_names]
    if missing:
        raise KeyError(f"unknown sampled parameter(s): {missing}")
    idx = [bundle.parameter_names.index(p) for p in parameter_subset]
    basis = _polynomial_basis(bundle.sampled_parameters[:, idx], degree)
    if bundle.iterations < basis.shape[1]:
        raise ValueError(
            f"{bundle.iterations} iterations cannot support a {basis.shape[1]}-column "
            "basis; increase N or reduce the basis"
        )
    nmb = _nmb_matrix(bundle, wtp, perspective, equity)
    fitted = np.empty_like(nmb)
    for k in range(nmb.shape[1]):
        coef, *_ = np.linalg.lstsq(basis, nmb[:, k], rcond=None)
        fitted[:, k] = basis @ coef
    value = float(fitted.max(axis=1).mean() - fitted.mean(axis=0).max())
    return max(0.0, value)


def evpi_analysis(
    bundle: PsaBundle,
    wtp: float,
    perspective: Perspective,
    population_size: Optional[float] = None,
    parameter_sets: Optional[Mapping[str, Sequence[str]]] = None,
) -> EvpiResult:
    """EVPI plus EVPPI for each named parameter set, assembled in one result."""
    per_person = evpi(bundle, wtp, perspective)
    evppi_values = {}
    if parameter_sets:
        for name, subset in parameter_sets.items():
            evppi_values[name] = evppi(bundle, subset, wtp, perspective)
    return EvpiResult(
        evpi_per_person=per_person,
        population_size=population_size,
        population_evpi=(
            population_evpi(per_person, population_size)
            if population_size is not None
            else None
        ),
        evppi_by_parameter_set=evppi_values,
    )


def deterministic_vop(
    ledgers_by_strategy: Mapping[str, OutcomeLedger],
    wtp: float,
    comparator_name: str,
) -> float:
    """Societal net benefit forgone by following the health-system decision.

    Zero when the two perspectives pick the same strategy at base parameters.
    """
    societal = decide(ledgers_by_strategy, wtp, SOCIETAL, comparator_name)
    health_system = decide(ledgers_by_strategy, wtp, HEALTH_SYSTEM, comparator_name)
    loss = (
        societal.nmb_per_strategy[societal.chosen_strategy]
        - societal.nmb_per_strategy[health_system.chosen_strategy]
    )
    return max(0.0, loss)


def evop(
    bundle: PsaBundle,
    wtp: float,
    *,
    mode: str = "per-iteration",
    equity: Optional[EquityWeights] = None,
    deterministic_loss: Optional[float] = None,
) -> VopResult:
    """Expected value of perspective over the PSA distribution.

    With mode "per-iteration" (the defining form) the health-system decision
    is recomputed for every parameter draw; "fixed-decision" holds it fixed
    at the strategy maximizing expected health-system NMB, as a sensitivity
    variant. `deterministic_loss`, when supplied, is carried through
    unchanged so the result reports both the base-case and expected loss.
    """
    if mode not in ("per-iteration", "fixed-decision"):
        raise ValueError(f"unknown evop mode {mode!r}")
    comp_idx = bundle.strategy_index(bundle.comparator)
    nmb_hs = _nmb_matrix(bundle, wtp, HEALTH_SYSTEM, equity)
    nmb_soc = _nmb_matrix(bundle, wtp, SOCIETAL, equity)
    if mode == "fixed-decision":
        fixed = choose_strategies(nmb_hs.mean(axis=0, keepdims=True), comp_idx)[0]
        chosen_hs = np.full(bundle.iterations, fixed)
    else:
        chosen_hs = choose_strategies(nmb_hs, comp_idx)
    chosen_soc = choose_strategies(nmb_soc, comp_idx)
    rows = np.arange(bundle.iterations)
    losses = np.maximum(
        0.0, nmb_soc[rows, chosen_soc] - nmb_soc[rows, chosen_hs]
    )
    return VopResult(
        deterministic_loss=deterministic_loss,
        evop=float(losses.mean()),
        per_iteration_losses=losses,
        discordance_probability=float(np.mean(chosen_hs != chosen_soc)),
    )
