"""Pattern queries on multivariate time series.

Exact dynamic time warping, subsequence search with repetition discovery,
a random-basis kernel surrogate for the alignment distance, and a
Bayesian-optimization window locator, plus the user-identification
benchmark harness built on them.
"""

__version__ = "0.1.0"

from .backends import active_backend
from .bayesopt import OptimizerConfig, SearchSpace, evaluate_objective, optimize_match
from .dtw import (
    CostMatrix,
    Mode,
    SakoeChibaBand,
    WarpingPath,
    accumulate_cost,
    best_path,
    dtw_distance,
    path_cost,
)
from .embedding import BasisSet, feature_map, generate_basis, load_basis, save_basis
from .identify import (
    IdentificationMatrix,
    Method,
    accuracy,
    build_identification_matrix,
    extract_reference,
    write_heatmap_pgm,
    write_matrix_csv,
)
from .instrumentation import counters
from .kernel import (
    KernelModel,
    fit_kernel_model,
    fit_lengthscale,
    kernel_distance,
    load_model,
    minmax_normalize,
    pairwise_error,
    rbf_kernel,
    save_model,
)
from .series import (
    Dataset,
    TimeSeries,
    euclidean_cost,
    load_series_file,
    load_uci_file,
    save_series_file,
    znormalize,
)
from .subsequence import Match, MatchingProfile, best_match, find_repetitions, matching_profile

__all__ = [
    "BasisSet",
    "CostMatrix",
    "Dataset",
    "IdentificationMatrix",
    "KernelModel",
    "Match",
    "MatchingProfile",
    "Method",
    "Mode",
    "OptimizerConfig",
    "SakoeChibaBand",
    "SearchSpace",
    "TimeSeries",
    "WarpingPath",
    "accumulate_cost",
    "accuracy",
    "active_backend",
    "best_match",
    "best_path",
    "build_identification_matrix",
    "counters",
    "dtw_distance",
    "euclidean_cost",
    "evaluate_objective",
    "extract_reference",
    "feature_map",
    "find_repetitions",
    "fit_kernel_model",
    "fit_lengthscale",
    "generate_basis",
    "kernel_distance",
    "load_basis",
    "load_model",
    "load_series_file",
    "load_uci_file",
    "matching_profile",
    "minmax_normalize",
    "optimize_match",
    "pairwise_error",
    "path_cost",
    "rbf_kernel",
    "save_basis",
    "save_model",
    "save_series_file",
    "write_heatmap_pgm",
    "write_matrix_csv",
    "znormalize",
]
