"""Declarative model definition, YAML ingestion, and strict validation.

A model is described entirely by data: health states with per-cycle costs
(split into direct medical, productivity, and out-of-pocket components) and
utilities, strategies with row-stochastic transition matrices, population
subgroups with baseline health and parameter overrides, discounting settings,
and the probabilistic-sensitivity-analysis sampling plan.

Validation is aggregate: every violated constraint is collected and reported
in a single :class:`ModelValidationError` rather than failing on the first
problem. Soft issues (e.g. an absorbing state explicitly configured with a
nonzero cost) are reported as warnings, not errors.

The loaded :class:`ModelSpec` is immutable and safe to share across workers.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping, Sequence, Union

import yaml

ROW_SUM_TOL = 1e-9

COST_COMPONENTS = ("direct_medical", "productivity", "out_of_pocket")

STATE_FIELDS = ("utility", "cost_direct_medical", "cost_productivity", "cost_out_of_pocket")

DISTRIBUTION_KINDS = ("beta", "gamma", "normal", "lognormal", "uniform", "dirichlet-row")

PRODUCTIVITY_METHODS = ("human-capital", "friction-cost")

POPULATION_MEAN = "population-mean"

OverrideValue = Union[float, tuple[float, ...]]


class ConfigError(Exception):
    """Base class for configuration problems."""


class ModelParseError(ConfigError):
    """The configuration file could not be read or parsed."""


class ModelValidationError(ConfigError):
    """One or more model invariants are violated.

    Attributes:
        errors: every violated invariant, not just the first.
        warnings: soft issues that do not block loading.
    """

    def __init__(self, errors: Sequence[str], warnings: Sequence[str] = ()):
        self.errors = list(errors)
        self.warnings = list(warnings)
        lines = "\n".join(f"  - {e}" for e in self.errors)
        super().__init__(f"{len(self.errors)} validation error(s):\n{lines}")


class ParameterPathError(ConfigError):
    """A dotted parameter path does not resolve, or resolves to the wrong kind."""


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HealthState:
    """One mutually exclusive health state with per-cycle values."""

    name: str
    utility: float
    cost_direct_medical: float = 0.0
    cost_productivity: float = 0.0
    cost_out_of_pocket: float = 0.0
    is_absorbing: bool = False


@dataclass(frozen=True)
class Strategy:
    """A decision alternative: a transition matrix plus one-time cost.

    ``transition_matrix`` rows follow the ModelSpec state order; row ``i``
    gives the probabilities of moving from state ``i`` to each state in one
    cycle. ``one_time_cost`` is charged per person at t=0 and booked to
    ``one_time_cost_component``.
    """

    name: str
    transition_matrix: tuple[tuple[float, ...], ...]
    one_time_cost: float = 0.0
    one_time_cost_component: str = "direct_medical"
    is_comparator: bool = False


@dataclass(frozen=True)
class Subgroup:
    """A population stratum with its own baseline health and overrides.

    ``parameter_overrides`` maps dotted parameter paths (see
    :func:`resolve_parameter_path`) to replacement values; a transition-row
    path takes a full row.
    """

    name: str
    population_share: float
    baseline_health: float
    parameter_overrides: Mapping[str, OverrideValue] = field(default_factory=dict)


@dataclass(frozen=True)
class DistributionSpec:
    """A sampling distribution attached to one model parameter.

    Supported kinds and their parameters:
        beta:          alpha, beta            (targets [0,1] quantities)
        gamma:         shape, scale           (targets nonnegative costs)
        normal:        mean, sd
        lognormal:     mu, sigma              (log-scale parameters)
        uniform:       low, high
        dirichlet-row: precision              (targets a full transition row;
                       concentration = base probabilities x precision,
                       structural zeros preserved)
    """

    kind: str
    target: str
    parameters: Mapping[str, float]


@dataclass(frozen=True)
class PsaSettings:
    """Monte Carlo plan: iteration count, master seed, and distributions."""

    iterations: int = 1000
    seed: int = 1
    distributions: tuple[DistributionSpec, ...] = ()


@dataclass(frozen=True)
class BudgetImpactSpec:
    """Budget impact inputs: eligible population, uptake, short horizon."""

    eligible_population: float
    uptake_rate: Union[float, tuple[float, ...]] = 1.0
    horizon_years: int = 5
    discounting: bool = False


@dataclass(frozen=True)
class ModelSpec:
    """Complete declarative model. Immutable once validated."""

    states: tuple[HealthState, ...]
    strategies: tuple[Strategy, ...]
    subgroups: tuple[Subgroup, ...]
    initial_distribution: tuple[float, ...]
    horizon_cycles: int
    wtp_threshold: float
    cycle_length_years: float = 1.0
    discount_rate_costs: float = 0.03
    discount_rate_effects: float = 0.03
    inequality_aversion: float = 0.5
    reference_health: Union[float, str] = POPULATION_MEAN
    productivity_method: str = "human-capital"
    friction_period_years: float | None = None
    half_cycle: bool = False
    psa: PsaSettings = field(default_factory=PsaSettings)
    bia: BudgetImpactSpec | None = None

    @property
    def state_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.states)

    @property
    def strategy_names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.strategies)

    @property
    def subgroup_names(self) -> tuple[str, ...]:
        return tuple(g.name for g in self.subgroups)

    def state_index(self, name: str) -> int:
        try:
            return self.state_names.index(name)
        except ValueError:
            raise KeyError(f"unknown state {name!r}") from None

    def comparator(self) -> Strategy:
        for s in self.strategies:
            if s.is_comparator:
                return s
        raise ValueError("no comparator strategy defined")

    def interventions(self) -> tuple[Strategy, ...]:
        return tuple(s for s in self.strategies if not s.is_comparator)


@dataclass
class ValidationReport:
    """Outcome of validating a ModelSpec: all errors plus soft warnings."""

    errors: list[str]
    warnings: list[str]

    @property
    def ok(self) -> bool:
        return not self.errors


# ---------------------------------------------------------------------------
# Parameter paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ResolvedPath:
    """A parsed dotted path into a ModelSpec.

    ``kind`` is one of:
        "state_field"  -> (state index, field name), scalar-valued
        "one_time_cost" -> (strategy index,), scalar-valued
        "matrix_row"   -> (strategy index, row index), row-valued
    """

    kind: str
    indices: tuple[int, ...]
    field_name: str = ""

    @property
    def is_row(self) -> bool:
        return self.kind == "matrix_row"


def resolve_parameter_path(spec: ModelSpec, path: str) -> ResolvedPath:
    """Resolve a dotted parameter path against a ModelSpec.

    Accepted forms:
        states.<state>.<field>                         scalar
        strategies.<strategy>.one_time_cost            scalar
        strategies.<strategy>.transition_matrix.<from> full row

    Raises ParameterPathError when the path does not resolve.
    """
    parts = path.split(".")
    if len(parts) >= 3 and parts[0] == "states":
        name, fld = parts[1], ".".join(parts[2:])
        if name not in spec.state_names:
            raise ParameterPathError(f"{path!r}: unknown state {name!r}")
        if fld not in STATE_FIELDS:
            raise ParameterPathError(f"{path!r}: unknown state field {fld!r}")
        return ResolvedPath("state_field", (spec.state_names.index(name),), fld)
    if len(parts) == 3 and parts[0] == "strategies" and parts[2] == "one_time_cost":
        name = parts[1]
        if name not in spec.strategy_names:
            raise ParameterPathError(f"{path!r}: unknown strategy {name!r}")
        return ResolvedPath("one_time_cost", (spec.strategy_names.index(name),))
    if len(parts) == 4 and parts[0] == "strategies" and parts[2] == "transition_matrix":
        name, from_state = parts[1], parts[3]
        if name not in spec.strategy_names:
            raise ParameterPathError(f"{path!r}: unknown strategy {name!r}")
        if from_state not in spec.state_names:
            raise ParameterPathError(f"{path!r}: unknown state {from_state!r}")
        return ResolvedPath(
            "matrix_row",
            (spec.strategy_names.index(name), spec.state_names.index(from_state)),
        )
    raise ParameterPathError(f"{path!r}: unrecognized parameter path")


def read_parameter(spec: ModelSpec, path: str) -> OverrideValue:
    """Return the current value at a dotted path (scalar or row tuple)."""
    rp = resolve_parameter_path(spec, path)
    if rp.kind == "state_field":
        return getattr(spec.states[rp.indices[0]], rp.field_name)
    if rp.kind == "one_time_cost":
        return spec.strategies[rp.indices[0]].one_time_cost
    return spec.strategies[rp.indices[0]].transition_matrix[rp.indices[1]]


def apply_parameter_values(
    spec: ModelSpec, assignment: Mapping[str, OverrideValue]
) -> ModelSpec:
    """Return a new ModelSpec with the given path -> value assignment applied.

    The base spec is never modified. Row paths take a sequence of length S;
    scalar paths take a number. A type mismatch raises ParameterPathError.
    """
    states = list(spec.states)
    strategies = list(spec.strategies)
    for path, value in assignment.items():
        rp = resolve_parameter_path(spec, path)
        if rp.is_row:
            if not isinstance(value, (list, tuple)):
                raise ParameterPathError(f"{path!r}: expected a row, got {value!r}")
            row = tuple(float(v) for v in value)
            if len(row) != len(spec.states):
                raise ParameterPathError(
                    f"{path!r}: row length {len(row)} != {len(spec.states)} states"
                )
            si, ri = rp.indices
            matrix = list(strategies[si].transition_matrix)
            matrix[ri] = row
            strategies[si] = replace(strategies[si], transition_matrix=tuple(matrix))
        else:
            if isinstance(value, (list, tuple)):
                raise ParameterPathError(f"{path!r}: expected a scalar, got {value!r}")
            value = float(value)
            if rp.kind == "state_field":
                (i,) = rp.indices
                states[i] = replace(states[i], **{rp.field_name: value})
            else:
                (i,) = rp.indices
                strategies[i] = replace(strategies[i], one_time_cost=value)
    return replace(spec, states=tuple(states), strategies=tuple(strategies))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _check_distribution(spec: ModelSpec, d: DistributionSpec, errors: list[str]) -> None:
    label = f"psa distribution on {d.target!r}"
    if d.kind not in DISTRIBUTION_KINDS:
        errors.append(f"{label}: unknown kind {d.kind!r}")
        return
    p = d.parameters
    required = {
        "beta": ("alpha", "beta"),
        "gamma": ("shape", "scale"),
        "normal": ("mean", "sd"),
        "lognormal": ("mu", "sigma"),
        "uniform": ("low", "high"),
        "dirichlet-row": ("precision",),
    }[d.kind]
    missing = [k for k in required if k not in p]
    if missing:
        errors.append(f"{label}: missing parameter(s) {missing} for kind {d.kind!r}")
        return
    if d.kind == "beta" and not (p["alpha"] > 0 and p["beta"] > 0):
        errors.append(f"{label}: beta requires alpha > 0 and beta > 0")
    if d.kind == "gamma" and not (p["shape"] > 0 and p["scale"] > 0):
        errors.append(f"{label}: gamma requires shape > 0 and scale > 0")
    if d.kind == "normal" and not p["sd"] > 0:
        errors.append(f"{label}: normal requires sd > 0")
    if d.kind == "lognormal" and not p["sigma"] > 0:
        errors.append(f"{label}: lognormal requires sigma > 0")
    if d.kind == "uniform" and not p["low"] <= p["high"]:
        errors.append(f"{label}: uniform requires low <= high")
    if d.kind == "dirichlet-row" and not p["precision"] > 0:
        errors.append(f"{label}: dirichlet-row requires precision > 0")

    try:
        rp = resolve_parameter_path(spec, d.target)
    except ParameterPathError as exc:
        errors.append(f"{label}: {exc}")
        return
    if d.kind == "dirichlet-row":
        if not rp.is_row:
            errors.append(f"{label}: dirichlet-row must target a transition-matrix row")
        else:
            row = spec.strategies[rp.indices[0]].transition_matrix[rp.indices[1]]
            if sum(1 for v in row if v > 0) < 2:
                errors.append(
                    f"{label}: target row has fewer than two positive entries; "
                    "sampling it is degenerate"
                )
        return
    if rp.is_row:
        errors.append(f"{label}: kind {d.kind!r} cannot target a transition-matrix row")
        return
    is_utility = rp.kind == "state_field" and rp.field_name == "utility"
    if d.kind == "beta" and not is_utility:
        errors.append(f"{label}: beta may only target [0,1] quantities (utilities)")
    if d.kind in ("gamma", "lognormal") and is_utility:
        errors.append(f"{label}: {d.kind} may only target nonnegative cost quantities")


def validate_model_spec(spec: ModelSpec) -> ValidationReport:
    """Check every model invariant; return all errors and warnings found."""
    errors: list[str] = []
    warnings: list[str] = []
    n_states = len(spec.states)

    if n_states == 0:
        errors.append("model must define at least one state")
    names = [s.name for s in spec.states]
    if len(set(names)) != len(names):
        errors.append("state names must be unique")

    for s in spec.states:
        if not 0.0 <= s.utility <= 1.0:
            errors.append(f"state {s.name!r}: utility must be in [0,1], got {s.utility}")
        for fld in STATE_FIELDS[1:]:
            v = getattr(s, fld)
            if v < 0:
                errors.append(f"state {s.name!r}: {fld} must be >= 0, got {v}")
        if s.is_absorbing:
            nonzero = [
                fld
                for fld in STATE_FIELDS
                if getattr(s, fld) not in (0, 0.0)
            ]
            if nonzero:
                warnings.append(
                    f"absorbing state {s.name!r} has nonzero {', '.join(nonzero)}; "
                    "treating as an explicit override"
                )

    if not spec.strategies:
        errors.append("model must define at least one strategy")
    strategy_names = [s.name for s in spec.strategies]
    if len(set(strategy_names)) != len(strategy_names):
        errors.append("strategy names must be unique")
    n_comparators = sum(1 for s in spec.strategies if s.is_comparator)
    if n_comparators != 1:
        errors.append(f"exactly one strategy must be the comparator, found {n_comparators}")

    for s in spec.strategies:
        m = s.transition_matrix
        if len(m) != n_states or any(len(row) != n_states for row in m):
            errors.append(
                f"strategy {s.name!r}: transition matrix must be {n_states}x{n_states}"
            )
            continue
        for i, row in enumerate(m):
            if any(not 0.0 <= v <= 1.0 for v in row):
                errors.append(
                    f"strategy {s.name!r}: transition row {names[i]!r} has entries "
                    "outside [0,1]"
                )
            total = sum(row)
            if abs(total - 1.0) > ROW_SUM_TOL:
                errors.append(
                    f"strategy {s.name!r}: transition row {names[i]!r} sums to {total:g}"
                )
        for i, st in enumerate(spec.states):
            if st.is_absorbing and abs(m[i][i] - 1.0) > ROW_SUM_TOL:
                errors.append(
                    f"strategy {s.name!r}: absorbing state {st.name!r} must have "
                    f"self-transition probability 1, got {m[i][i]:g}"
                )
        if s.one_time_cost < 0:
            errors.append(f"strategy {s.name!r}: one_time_cost must be >= 0")
        if s.one_time_cost_component not in COST_COMPONENTS:
            errors.append(
                f"strategy {s.name!r}: one_time_cost_component must be one of "
                f"{COST_COMPONENTS}, got {s.one_time_cost_component!r}"
            )

    if not spec.subgroups:
        errors.append("model must define at least one subgroup")
    subgroup_names = [g.name for g in spec.subgroups]
    if len(set(subgroup_names)) != len(subgroup_names):
        errors.append("subgroup names must be unique")
    if spec.subgroups:
        share_total = sum(g.population_share for g in spec.subgroups)
        if abs(share_total - 1.0) > ROW_SUM_TOL:
            errors.append(f"subgroup population shares sum to {share_total:g}, expected 1")
    for g in spec.subgroups:
        if not 0.0 <= g.population_share <= 1.0:
            errors.append(f"subgroup {g.name!r}: population_share must be in [0,1]")
        if not g.baseline_health > 0:
            errors.append(
                f"subgroup {g.name!r}: baseline_health must be > 0, "
                f"got {g.baseline_health}"
            )
        for path in g.parameter_overrides:
            try:
                resolve_parameter_path(spec, path)
            except ParameterPathError as exc:
                errors.append(f"subgroup {g.name!r}: {exc}")

    if len(spec.initial_distribution) != n_states:
        errors.append(
            f"initial_distribution has length {len(spec.initial_distribution)}, "
            f"expected {n_states}"
        )
    else:
        if any(not 0.0 <= v <= 1.0 for v in spec.initial_distribution):
            errors.append("initial_distribution entries must be in [0,1]")
        total = sum(spec.initial_distribution)
        if abs(total - 1.0) > ROW_SUM_TOL:
            errors.append(f"initial_distribution sums to {total:g}, expected 1")

    if spec.horizon_cycles < 1:
        errors.append(f"horizon_cycles must be >= 1, got {spec.horizon_cycles}")
    if not spec.cycle_length_years > 0:
        errors.append(f"cycle_length_years must be > 0, got {spec.cycle_length_years}")
    for label, rate in (
        ("discount.costs", spec.discount_rate_costs),
        ("discount.effects", spec.discount_rate_effects),
    ):
        if not 0.0 <= rate < 1.0:
            errors.append(f"{label} must be in [0,1), got {rate}")
    if spec.wtp_threshold < 0:
        errors.append(f"wtp_threshold must be >= 0, got {spec.wtp_threshold}")
    if spec.inequality_aversion < 0:
        errors.append(
            f"inequality_aversion must be >= 0, got {spec.inequality_aversion}"
        )
    if isinstance(spec.reference_health, str):
        if spec.reference_health != POPULATION_MEAN:
            errors.append(
                f"reference_health must be > 0 or {POPULATION_MEAN!r}, "
                f"got {spec.reference_health!r}"
            )
    elif not spec.reference_health > 0:
        errors.append(f"reference_health must be > 0, got {spec.reference_health}")
    if spec.productivity_method not in PRODUCTIVITY_METHODS:
        errors.append(
            f"productivity_method must be one of {PRODUCTIVITY_METHODS}, "
            f"got {spec.productivity_method!r}"
        )
    if spec.productivity_method == "friction-cost":
        if spec.friction_period_years is None or not spec.friction_period_years > 0:
            errors.append(
                "friction_period_years must be > 0 when productivity_method is "
                "friction-cost"
            )

    if spec.psa.iterations < 1:
        errors.append(f"psa.iterations must be >= 1, got {spec.psa.iterations}")
    for d in spec.psa.distributions:
        _check_distribution(spec, d, errors)

    if spec.bia is not None:
        b = spec.bia
        if b.eligible_population < 0:
            errors.append("bia.eligible_population must be >= 0")
        if not 1 <= b.horizon_years <= 5:
            errors.append(f"bia.horizon_years must be in 1..5, got {b.horizon_years}")
        rates = b.uptake_rate if isinstance(b.uptake_rate, tuple) else (b.uptake_rate,)
        if any(not 0.0 <= r <= 1.0 for r in rates):
            errors.append("bia.uptake_rate values must be in [0,1]")
        if isinstance(b.uptake_rate, tuple) and len(b.uptake_rate) != b.horizon_years:
            errors.append(
                f"bia.uptake_rate schedule has length {len(b.uptake_rate)}, "
                f"expected horizon_years = {b.horizon_years}"
            )

    return ValidationReport(errors, warnings)


# ---------------------------------------------------------------------------
# Loading and serialization
# ---------------------------------------------------------------------------


def _as_float_tuple(value: Any, label: str, errors: list[str]) -> tuple[float, ...]:
    if not isinstance(value, (list, tuple)):
        errors.append(f"{label}: expected a list of numbers")
        return ()
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError):
        errors.append(f"{label}: expected a list of numbers")
        return ()


def build_model_spec(raw: Mapping[str, Any], source: str = "<config>") -> ModelSpec:
    """Build and validate a ModelSpec from parsed configuration data.

    Structural problems (missing keys, wrong shapes) and invariant violations
    are aggregated into one ModelValidationError.
    """
    errors: list[str] = []
    if not isinstance(raw, Mapping):
        raise ModelParseError(f"{source}: top level must be a mapping")

    known_keys = {
        "states", "strategies", "subgroups", "initial_distribution",
        "horizon_cycles", "cycle_length_years", "discount", "wtp_threshold",
        "inequality_aversion", "reference_health", "productivity_method",
        "friction_period_years", "half_cycle", "psa", "bia",
    }
    for key in raw:
        if key not in known_keys:
            errors.append(f"unknown top-level key {key!r}")

    states: list[HealthState] = []
    state_names: list[str] = []
    for i, item in enumerate(raw.get("states") or []):
        if not isinstance(item, Mapping) or "name" not in item:
            errors.append(f"states[{i}]: each state needs at least a 'name'")
            continue
        try:
            states.append(
                HealthState(
                    name=str(item["name"]),
                    utility=float(item.get("utility", 0.0)),
                    cost_direct_medical=float(item.get("cost_direct_medical", 0.0)),
                    cost_productivity=float(item.get("cost_productivity", 0.0)),
                    cost_out_of_pocket=float(item.get("cost_out_of_pocket", 0.0)),
                    is_absorbing=bool(item.get("is_absorbing", False)),
                )
            )
            state_names.append(str(item["name"]))
        except (TypeError, ValueError) as exc:
            errors.append(f"states[{i}] ({item.get('name')!r}): {exc}")

    strategies: list[Strategy] = []
    for i, item in enumerate(raw.get("strategies") or []):
        if not isinstance(item, Mapping) or "name" not in item:
            errors.append(f"strategies[{i}]: each strategy needs at least a 'name'")
            continue
        label = f"strategies[{i}] ({item.get('name')!r})"
        tm_raw = item.get("transition_matrix")
        matrix: list[tuple[float, ...]] = []
        if isinstance(tm_raw, Mapping):
            missing = [n for n in state_names if n not in tm_raw]
            extra = [n for n in tm_raw if n not in state_names]
            if missing:
                errors.append(f"{label}: transition_matrix missing row(s) for {missing}")
            if extra:
                errors.append(f"{label}: transition_matrix has unknown state row(s) {extra}")
            for n in state_names:
                row = _as_float_tuple(
                    tm_raw.get(n, ()), f"{label}: transition_matrix.{n}", errors
                )
                matrix.append(row if row else (0.0,) * len(state_names))
        else:
            errors.append(f"{label}: transition_matrix must map each state to a row")
            matrix = [(0.0,) * len(state_names) for _ in state_names]
        try:
            strategies.append(
                Strategy(
                    name=str(item["name"]),
                    transition_matrix=tuple(matrix),
                    one_time_cost=float(item.get("one_time_cost", 0.0)),
                    one_time_cost_component=str(
                        item.get("one_time_cost_component", "direct_medical")
                    ),
                    is_comparator=bool(item.get("is_comparator", False)),
                )
            )
        except (TypeError, ValueError) as exc:
            errors.append(f"{label}: {exc}")

    subgroups: list[Subgroup] = []
    for i, item in enumerate(raw.get("subgroups") or []):
        if not isinstance(item, Mapping) or "name" not in item:
            errors.append(f"subgroups[{i}]: each subgroup needs at least a 'name'")
            continue
        overrides_raw = item.get("parameter_overrides") or {}
        overrides: dict[str, OverrideValue] = {}
        for path, value in overrides_raw.items():
            if isinstance(value, (list, tuple)):
                overrides[str(path)] = tuple(float(v) for v in value)
            else:
                overrides[str(path)] = float(value)
        try:
            subgroups.append(
                Subgroup(
                    name=str(item["name"]),
                    population_share=float(item.get("population_share", 1.0)),
                    baseline_health=float(item.get("baseline_health", 1.0)),
                    parameter_overrides=overrides,
                )
            )
        except (TypeError, ValueError) as exc:
            errors.append(f"subgroups[{i}] ({item.get('name')!r}): {exc}")
    if not subgroups and "subgroups" not in raw:
        # Implicit single total-population subgroup.
        subgroups = [Subgroup(name="total", population_share=1.0, baseline_health=1.0)]

    discount = raw.get("discount") or {}
    if not isinstance(discount, Mapping):
        errors.append("discount must be a mapping with 'costs' and 'effects'")
        discount = {}

    psa_raw = raw.get("psa") or {}
    distributions: list[DistributionSpec] = []
    for i, item in enumerate(psa_raw.get("distributions") or []):
        if not isinstance(item, Mapping) or "kind" not in item or "target" not in item:
            errors.append(f"psa.distributions[{i}]: needs 'kind' and 'target'")
            continue
        params = {
            str(k): float(v) for k, v in (item.get("parameters") or {}).items()
        }
        distributions.append(
            DistributionSpec(
                kind=str(item["kind"]), target=str(item["target"]), parameters=params
            )
        )
    psa = PsaSettings(
        iterations=int(psa_raw.get("iterations", 1000)),
        seed=int(psa_raw.get("seed", 1)),
        distributions=tuple(distributions),
    )

    bia: BudgetImpactSpec | None = None
    if raw.get("bia") is not None:
        b = raw["bia"]
        if not isinstance(b, Mapping):
            errors.append("bia must be a mapping")
        else:
            uptake = b.get("uptake_rate", 1.0)
            if isinstance(uptake, (list, tuple)):
                uptake = tuple(float(v) for v in uptake)
            else:
                uptake = float(uptake)
            bia = BudgetImpactSpec(
                eligible_population=float(b.get("eligible_population", 0.0)),
                uptake_rate=uptake,
                horizon_years=int(b.get("horizon_years", 5)),
                discounting=bool(b.get("discounting", False)),
            )

    reference_health: Union[float, str] = raw.get("reference_health", POPULATION_MEAN)
    if not isinstance(reference_health, str):
        reference_health = float(reference_health)

    friction = raw.get("friction_period_years")

    if "wtp_threshold" not in raw:
        errors.append("wtp_threshold is required")
    if "horizon_cycles" not in raw:
        errors.append("horizon_cycles is required")

    spec = ModelSpec(
        states=tuple(states),
        strategies=tuple(strategies),
        subgroups=tuple(subgroups),
        initial_distribution=_as_float_tuple(
            raw.get("initial_distribution", ()), "initial_distribution", errors
        ),
        horizon_cycles=int(raw.get("horizon_cycles", 1)),
        cycle_length_years=float(raw.get("cycle_length_years", 1.0)),
        discount_rate_costs=float(discount.get("costs", 0.03)),
        discount_rate_effects=float(discount.get("effects", 0.03)),
        wtp_threshold=float(raw.get("wtp_threshold", 0.0)),
        inequality_aversion=float(raw.get("inequality_aversion", 0.5)),
        reference_health=reference_health,
        productivity_method=str(raw.get("productivity_method", "human-capital")),
        friction_period_years=None if friction is None else float(friction),
        half_cycle=bool(raw.get("half_cycle", False)),
        psa=psa,
        bia=bia,
    )

    report = validate_model_spec(spec)
    errors.extend(report.errors)
    if errors:
        raise ModelValidationError(errors, report.warnings)
    return spec


def load_model_spec(path: Union[str, Path]) -> ModelSpec:
    """Load, parse, and fully validate a model configuration file.

    Raises ModelParseError on unreadable or malformed YAML (with line
    context when available) and ModelValidationError listing every violated
    invariant otherwise.
    """
    path = Path(path)
    if not path.exists():
        raise ModelParseError(f"configuration file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ModelParseError(f"{path}: {exc}") from exc
    if raw is None:
        raise ModelParseError(f"{path}: file is empty")
    return build_model_spec(raw, source=str(path))


def model_spec_to_dict(spec: ModelSpec) -> dict[str, Any]:
    """Serialize a ModelSpec to plain data (inverse of build_model_spec)."""
    out: dict[str, Any] = {
        "states": [
            {
                "name": s.name,
                "utility": s.utility,
                "cost_direct_medical": s.cost_direct_medical,
                "cost_productivity": s.cost_productivity,
                "cost_out_of_pocket": s.cost_out_of_pocket,
                "is_absorbing": s.is_absorbing,
            }
            for s in spec.states
        ],
        "strategies": [
            {
                "name": s.name,
                "transition_matrix": {
                    name: list(row)
                    for name, row in zip(spec.state_names, s.transition_matrix)
                },
                "one_time_cost": s.one_time_cost,
                "one_time_cost_component": s.one_time_cost_component,
                "is_comparator": s.is_comparator,
            }
            for s in spec.strategies
        ],
        "subgroups": [
            {
                "name": g.name,
                "population_share": g.population_share,
                "baseline_health": g.baseline_health,
                "parameter_overrides": {
                    path: (list(v) if isinstance(v, tuple) else v)
                    for path, v in g.parameter_overrides.items()
                },
            }
            for g in spec.subgroups
        ],
        "initial_distribution": list(spec.initial_distribution),
        "horizon_cycles": spec.horizon_cycles,
        "cycle_length_years": spec.cycle_length_years,
        "discount": {
            "costs": spec.discount_rate_costs,
            "effects": spec.discount_rate_effects,
        },
        "wtp_threshold": spec.wtp_threshold,
        "inequality_aversion": spec.inequality_aversion,
        "reference_health": spec.reference_health,
        "productivity_method": spec.productivity_method,
        "friction_period_years": spec.friction_period_years,
        "half_cycle": spec.half_cycle,
        "psa": {
            "iterations": spec.psa.iterations,
            "seed": spec.psa.seed,
            "distributions": [
                {"kind": d.kind, "target": d.target, "parameters": dict(d.parameters)}
                for d in spec.psa.distributions
            ],
        },
    }
    if spec.bia is not None:
        out["bia"] = {
            "eligible_population": spec.bia.eligible_population,
            "uptake_rate": (
                list(spec.bia.uptake_rate)
                if isinstance(spec.bia.uptake_rate, tuple)
                else spec.bia.uptake_rate
            ),
            "horizon_years": spec.bia.horizon_years,
            "discounting": spec.bia.discounting,
        }
    return out


def serialize_model_spec(spec: ModelSpec) -> str:
    """Render a ModelSpec back to YAML that round-trips through load."""
    return yaml.safe_dump(model_spec_to_dict(spec), sort_keys=False)


def spec_digest(spec: ModelSpec) -> str:
    """Content hash of a ModelSpec (stable across key ordering)."""
    canonical = json.dumps(model_spec_to_dict(spec), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()


def resolve_subgroup_spec(spec: ModelSpec, subgroup: Subgroup) -> ModelSpec:
    """Effective parameter set for one subgroup, with its overrides applied.

    Pure: the base spec is unmodified and repeated calls return equal views.
    The merged view is re-validated, so an override that breaks an invariant
    (e.g. a non-stochastic transition row) raises ModelValidationError.
    """
    if subgroup not in spec.subgroups:
        raise ValueError(f"subgroup {subgroup.name!r} does not belong to this spec")
    if not subgroup.parameter_overrides:
        return spec
    view = apply_parameter_values(spec, subgroup.parameter_overrides)
    report = validate_model_spec(view)
    if not report.ok:
        raise ModelValidationError(
            [f"subgroup {subgroup.name!r} overrides: {e}" for e in report.errors],
            report.warnings,
        )
    return view
