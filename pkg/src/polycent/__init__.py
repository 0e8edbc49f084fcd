"""Centroid inference for probability distributions under linear moment constraints.

Estimates an unknown distribution constrained by ``sum_i p_i f_ji = 1`` by
locating the centroid of the feasible polytope: a damped-Newton saddle
solver produces the first-order estimate (the analytic center), a
Gaussian-fluctuation pass refines it, a hit-and-run walk provides the
brute-force reference, and the maximum-entropy solution is available for
comparison.
"""

from ._version import __version__
from .analysis import (
    ComparisonReport,
    Figure1Result,
    StrongLimitReport,
    WeakLimitReport,
    compare_distributions,
    gen_gaussian_constraints,
    leading_order_estimate,
    run_figure1,
    strong_limit_gap_check,
    weak_limit_gap_check,
    write_figure1_bundle,
)
from .errors import (
    ConstraintValidationError,
    DegenerateInterval,
    FileFormatError,
    InfeasibleDomain,
    NegativeComponent,
    NoInteriorPoint,
    NonConvergence,
    NumericalError,
    PolycentError,
    RankDeficient,
    RegimeMismatch,
    SingularJacobian,
    Unbounded,
    WrongDimension,
    ZeroRow,
)
from .geometry import (
    classify_strength,
    expected_error,
    log_volume,
    log_volume_bound,
    squared_error,
    widths,
)
from .maxent import MaxEntSolution, entropy, solve_maxent
from .model import (
    ConstraintSet,
    GeometrySummary,
    ProbabilityVector,
    Regime,
    SaddlePoint,
    SampleStats,
    read_constraints,
    read_distribution,
    read_stats,
    validate,
    write_constraints,
    write_distribution,
    write_stats,
)
from .saddle import (
    FluctuationMatrix,
    SolverOptions,
    centroid_first_order,
    centroid_second_order,
    fluctuation_matrix,
    log_partition_fluct,
    solve_saddle,
)
from .sampler import (
    PolytopeChart,
    chart,
    hit_and_run,
    merge_stats,
    segment_centroid,
    variance_estimates,
)

__all__ = [
    "__version__",
    "ComparisonReport",
    "ConstraintSet",
    "ConstraintValidationError",
    "DegenerateInterval",
    "Figure1Result",
    "FileFormatError",
    "FluctuationMatrix",
    "GeometrySummary",
    "InfeasibleDomain",
    "MaxEntSolution",
    "NegativeComponent",
    "NoInteriorPoint",
    "NonConvergence",
    "NumericalError",
    "PolycentError",
    "PolytopeChart",
    "ProbabilityVector",
    "RankDeficient",
    "Regime",
    "RegimeMismatch",
    "SaddlePoint",
    "SampleStats",
    "SingularJacobian",
    "SolverOptions",
    "StrongLimitReport",
    "Unbounded",
    "WeakLimitReport",
    "WrongDimension",
    "ZeroRow",
    "chart",
    "classify_strength",
    "compare_distributions",
    "centroid_first_order",
    "centroid_second_order",
    "entropy",
    "expected_error",
    "fluctuation_matrix",
    "gen_gaussian_constraints",
    "hit_and_run",
    "leading_order_estimate",
    "log_partition_fluct",
    "log_volume",
    "log_volume_bound",
    "merge_stats",
    "read_constraints",
    "read_distribution",
    "read_stats",
    "run_figure1",
    "segment_centroid",
    "solve_maxent",
    "solve_saddle",
    "squared_error",
    "strong_limit_gap_check",
    "validate",
    "variance_estimates",
    "weak_limit_gap_check",
    "widths",
    "write_constraints",
    "write_distribution",
    "write_figure1_bundle",
    "write_stats",
]
