"""Sparse linear regression with kinetic-energy-plus penalties."""

__version__ = "0.1.0"

from .errors import (
    CsvFormatError,
    DataError,
    DomainError,
    KepregError,
    NumericalError,
    RegimeError,
)
from .experiments import (
    Schedule,
    SimConfig,
    SimReport,
    SimTruth,
    fse,
    generate_instance,
    run_cv_experiment,
    run_schedule_experiment,
    spe,
)
from .model_select import CvResult, cross_validate
from .penalties import (
    PenaltyKind,
    PenaltyParams,
    conjugate_weights,
    kep_penalty,
    kep_penalty_derivative,
    kep_penalty_second_derivative,
    mcp_penalty,
    nesting_eta,
    normalized_phi,
    penalty_value,
)
from .prox import (
    Regime,
    ThresholdDecision,
    UnivariateProblem,
    half_threshold,
    kep_threshold,
    mcp_threshold,
    oracle_threshold,
    phi,
    phi_sq_lipschitz_bound,
    soft_threshold,
)
from .solvers import (
    CdResult,
    IrlsResult,
    PathGrid,
    PathSolution,
    StandardizedDesign,
    cd_path,
    cd_single,
    cell_params,
    irls_lq,
    lla_solve,
    objective_value,
)

__all__ = [
    "__version__",
    "KepregError",
    "DomainError",
    "RegimeError",
    "DataError",
    "CsvFormatError",
    "NumericalError",
    "PenaltyKind",
    "PenaltyParams",
    "nesting_eta",
    "kep_penalty",
    "kep_penalty_derivative",
    "kep_penalty_second_derivative",
    "normalized_phi",
    "mcp_penalty",
    "conjugate_weights",
    "penalty_value",
    "Regime",
    "ThresholdDecision",
    "UnivariateProblem",
    "phi",
    "phi_sq_lipschitz_bound",
    "kep_threshold",
    "mcp_threshold",
    "soft_threshold",
    "half_threshold",
    "oracle_threshold",
    "StandardizedDesign",
    "PathGrid",
    "PathSolution",
    "CdResult",
    "IrlsResult",
    "cell_params",
    "objective_value",
    "cd_single",
    "cd_path",
    "lla_solve",
    "irls_lq",
    "CvResult",
    "cross_validate",
    "Schedule",
    "SimConfig",
    "SimTruth",
    "SimReport",
    "generate_instance",
    "spe",
    "fse",
    "run_schedule_experiment",
    "run_cv_experiment",
]
