"""fracorder: forward and inverse solvers for systems of time-fractional
pseudo-differential equations with diagonalizable matrix symbols.

The forward problem evaluates the Fourier transform of the solution
mode by mode through Mittag-Leffler functions; the inverse problem
recovers the vector of fractional orders from the transform observed at
a single time-frequency point by bisecting strictly monotone real-part
maps, with numerically certified monotonicity.
"""

__version__ = "0.1.0"

from .errors import (
    ContourViolation,
    DegenerateEigenvalues,
    DegenerateSignCondition,
    InconsistentData,
    InvalidTime,
    InversePreconditionError,
    KindMismatch,
    ModelError,
    NoMonotoneTime,
    NonConvergence,
    NonSymmetric,
    NoRoot,
    NotDiagonalizable,
    NumericError,
    OutOfDomain,
    QuadratureFailure,
    RangeViolation,
    SchemaError,
    SingularK,
    SpectralConditionViolation,
    SpectrumFormatError,
    ToolkitError,
)
from .forward import (
    BandLimitedData,
    ObservationRecord,
    VectorOrder,
    fourier_solution_caputo,
    fourier_solution_grid,
    fourier_solution_point,
    fourier_solution_rl,
    k_coeff,
    observe,
    spatial_solution,
)
from .inverse import (
    MonotonicityCertificate,
    RecoveryResult,
    Tolerances,
    build_k_matrix,
    recover_order,
    recover_vector_order,
    reduce_targets,
    suggest_observation_time,
    verify_monotonicity,
)
from .mlfunc import (
    DEFAULT_POLICY,
    HankelContour,
    MLRegimePolicy,
    caputo_observable,
    ml_contour,
    ml_one,
    ml_series,
    ml_two,
    monotone_map_caputo,
    monotone_map_rl,
    rl_observable,
    rl_sign_factor,
)
from .scenario import Scenario, example_scenario_dict, load_scenario
from .symbolkit import (
    ConditionReport,
    Diagonalization,
    FrequencyBox,
    MatrixSymbol,
    check_conditions,
    diagonalize,
    eigenvalue_crossings,
    evaluate_symbol,
)

__all__ = [name for name in dir() if not name.startswith("_")]
