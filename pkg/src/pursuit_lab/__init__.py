"""Greedy pursuit sparse recovery: MP, OMP and GP with stagewise-weak and
relaxed-weak selection, RIP certification, theoretical bounds and
reproducible recovery experiments."""

from .bounds import (
    BoundsReport,
    ConvergenceConstants,
    EstimationFactors,
    LemmaReport,
    RipLemmaViolation,
    bounds_report,
    check_adjoint_lower_bound,
    check_rip_consequences,
    convergence_constants,
    estimation_error_factors,
    support_id_condition_relaxed,
    support_id_condition_weak,
)
from .ensembles import (
    ConcentrationReport,
    Ensemble,
    EnsembleSpec,
    MeasurementConstants,
    RipCertificate,
    concentration_bound,
    concentration_check,
    generate,
    measurement_bound,
    rip_exhaustive,
    rip_sampled,
)
from .experiments import (
    CompressibleSpec,
    PhaseTransitionResult,
    PhaseTransitionSpec,
    SnrResult,
    TrialResult,
    run_compressible_study,
    run_phase_transition,
    snr,
)
from .linalg import ConvergenceError, DimensionError, RankDeficientError, least_squares
from .pursuit import (
    Algorithm,
    NumericalError,
    PursuitConfig,
    PursuitTrace,
    SparseSignal,
    Status,
    exact_recovery_check,
    recover_on_support,
    run_gp,
    run_mp,
    run_omp,
    run_pursuit,
)
from .selection import RuleKind, SelectionRule, relaxed_nonempty_bound, select, select_relaxed, select_weak

__version__ = "0.1.0"
