"""Distance covariance, HSIC, and the bijective metric-kernel transform."""

from .exceptions import DegenerateInputError, InvalidInputError, SampleTooSmallError
from .matrices import (
    CenteredMatrix,
    Centering,
    Kind,
    PairwiseMatrix,
    distance_matrix,
    double_center,
    kernel_matrix,
    median_bandwidth,
    single_center,
    u_center,
)
from .permutation import TestResult, permutation_test, pvalue_equivalence_check
from .stats import (
    PipelineConfig,
    StatValue,
    StatVariant,
    biased_stat,
    compute_stat,
    corrected_unbiased_hsic,
    normalized_stat,
    stat_pipeline,
    unbiased_stat,
)
from .transforms import (
    TransformSpec,
    bijective,
    bijective_scaled,
    bijective_to_kernel,
    bijective_to_metric,
    fixed_point_shift,
    fixed_point_to_kernel,
    fixed_point_to_metric,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateInputError",
    "InvalidInputError",
    "SampleTooSmallError",
    "CenteredMatrix",
    "Centering",
    "Kind",
    "PairwiseMatrix",
    "distance_matrix",
    "double_center",
    "kernel_matrix",
    "median_bandwidth",
    "single_center",
    "u_center",
    "TestResult",
    "permutation_test",
    "pvalue_equivalence_check",
    "PipelineConfig",
    "StatValue",
    "StatVariant",
    "biased_stat",
    "compute_stat",
    "corrected_unbiased_hsic",
    "normalized_stat",
    "stat_pipeline",
    "unbiased_stat",
    "TransformSpec",
    "bijective",
    "bijective_scaled",
    "bijective_to_kernel",
    "bijective_to_metric",
    "fixed_point_shift",
    "fixed_point_to_kernel",
    "fixed_point_to_metric",
]
