"""Information-regret tradeoffs for resolving two incoherent point sources.

The package builds the one-photon state of a two-source image, computes
quantum and classical Fisher information for direct imaging, mode sorting,
and random projective measurements, and evaluates the tradeoff relation the
resulting information regrets obey.  ``irtr_lab.experiments`` and the
``irtr-lab`` console script reproduce the standard datasets.
"""

__version__ = "0.1.0"

from .errors import (
    BoundViolationError,
    ConfigError,
    ConvergenceError,
    CutoffError,
    DegenerateOutcomeError,
    DegenerateStateError,
    InfeasibleBudgetError,
    IrtrLabError,
    NormalizationError,
)
from .psf_core import (
    OverlapIntegrals,
    PointSpreadFunction,
    QuadratureSpec,
    SourceGeometry,
    check_normalization,
    eval_psf,
    eval_psf_derivative,
    gaussian_overlap_integrals,
    gaussian_psf,
    load_user_psf,
    overlap_integrals,
    user_psf_from_samples,
)
from .state_model import (
    IncompatibilityCoefficients,
    Qfim,
    StateModel4,
    build_state_model,
    commutator_quantity,
    gaussian_incompatibility,
    incompatibility,
    qfim,
    subspace_basis_wavefunctions,
    verify_sld,
)
from .measurements import (
    ProbabilityModel,
    ProjectiveMeasurement4,
    RegretReport,
    direct_imaging_model,
    direct_imaging_pixelated_model,
    fim,
    haar_random_orthogonal,
    hermite_gaussian_wavefunction,
    projective_model,
    regret_report,
    spade_model,
)
from .tradeoff import (
    ErrorBudget,
    TradeoffPoint,
    error_tradeoff_residual,
    irtr_frontier,
    irtr_residual,
    small_separation_error_bound,
)
from .experiments import (
    ExperimentConfig,
    RunManifest,
    run_custom,
    run_fig1,
    run_fig2,
    run_fig3,
    run_fig4,
    run_fig5,
)

__all__ = [
    "BoundViolationError",
    "ConfigError",
    "ConvergenceError",
    "CutoffError",
    "DegenerateOutcomeError",
    "DegenerateStateError",
    "ErrorBudget",
    "ExperimentConfig",
    "IncompatibilityCoefficients",
    "InfeasibleBudgetError",
    "IrtrLabError",
    "NormalizationError",
    "OverlapIntegrals",
    "PointSpreadFunction",
    "ProbabilityModel",
    "ProjectiveMeasurement4",
    "Qfim",
    "QuadratureSpec",
    "RegretReport",
    "RunManifest",
    "SourceGeometry",
    "StateModel4",
    "TradeoffPoint",
    "build_state_model",
    "check_normalization",
    "commutator_quantity",
    "direct_imaging_model",
    "direct_imaging_pixelated_model",
    "error_tradeoff_residual",
    "eval_psf",
    "eval_psf_derivative",
    "fim",
    "gaussian_incompatibility",
    "gaussian_overlap_integrals",
    "gaussian_psf",
    "haar_random_orthogonal",
    "hermite_gaussian_wavefunction",
    "incompatibility",
    "irtr_frontier",
    "irtr_residual",
    "load_user_psf",
    "overlap_integrals",
    "projective_model",
    "qfim",
    "regret_report",
    "run_custom",
    "run_fig1",
    "run_fig2",
    "run_fig3",
    "run_fig4",
    "run_fig5",
    "small_separation_error_bound",
    "spade_model",
    "subspace_basis_wavefunctions",
    "user_psf_from_samples",
    "verify_sld",
]
