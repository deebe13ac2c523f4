"""Sequential binary hypothesis testing: coupled belief processes,
informational-redundancy diagnostics and inferential error decomposition."""

from .beliefs import (
    bayes_update,
    belief_from_log_odds,
    belief_of,
    log_odds,
    odds_of,
    sigma,
)
from .continuous import (
    FilterSpec,
    SdeSpec,
    drift_integral,
    filter_paths,
    misspecified_filter,
    misspecified_filter_ensemble,
    sde_paths,
    simulate_loglr_ensemble,
    simulate_loglr_sde,
)
from .discrete import (
    PathRecord,
    ScenarioSpec,
    classify_outcome,
    simulate_path,
    simulate_paths,
    small_increment_diagnostic,
)
from .errors import (
    AssetScenario,
    ErrorDecomposition,
    asset_scenario,
    bias_term,
    decompose,
    rho_of,
    sign_statistics,
)
from .measures import (
    BernoulliIID,
    GaussianIID,
    GaussianSchedule,
    TestClass,
    adjacency_gap,
    classify_pair,
    loglr_increment,
    loglr_path,
)
from .redundancy import (
    BeliefEnsemble,
    RedundancyReport,
    RedundancyTolerances,
    WitnessSet,
    belief_ensemble,
    ensemble_from_records,
    fit_power_law,
    fit_state_map,
    ito_ode_check,
    path_dependency_witness,
    redundancy_verdict,
)

__version__ = "0.1.0"
