"""Multi-perspective, equity-aware cost-effectiveness analysis engine.

Markov cohort simulation with parallel cost ledgers per accounting
perspective, probabilistic sensitivity analysis, distributional
(equity-weighted) analysis, value of information, and value-of-perspective
metrics quantifying the cost of decision discordance between perspectives.
"""

from .__about__ import __version__
from .budget import (
    BudgetImpactResult,
    CoiTable,
    budget_impact,
    cost_of_illness,
)
from .config import (
    BudgetImpactSpec,
    ConfigError,
    DistributionSpec,
    HealthState,
    ModelParseError,
    ModelSpec,
    ModelValidationError,
    PsaSettings,
    Strategy,
    Subgroup,
    apply_parameter_values,
    load_model_spec,
    resolve_subgroup_spec,
    serialize_model_spec,
    spec_digest,
    validate_model_spec,
)
from .equity import (
    EquityPlanePoint,
    EquityWeights,
    atkinson_index,
    atkinson_weights,
    equity_plane,
    equity_weighted_nmb,
)
from .markov import (
    CohortTrace,
    OutcomeLedger,
    accumulate_outcomes,
    combine_ledgers,
    run_cohort,
    run_cohort_batch,
    run_strategy,
)
from .metrics import (
    HEALTH_SYSTEM,
    PERSPECTIVES,
    SOCIETAL,
    DecisionRecord,
    IcerResult,
    Perspective,
    decide,
    icer,
    nmb,
)
from .pipeline import ResultsBundle, render_report, run_analysis_pipeline
from .psa import (
    CeacTable,
    PsaBundle,
    ceac,
    ce_plane_points,
    delta_nmb_distribution,
    run_psa,
    sample_parameters,
)
from .sensitivity import (
    SobolResult,
    TornadoEntry,
    sobol_estimate,
    sobol_indices,
    tornado,
)
from .voi import (
    EvpiResult,
    VopResult,
    deterministic_vop,
    evop,
    evpi,
    evppi,
    population_evpi,
)

