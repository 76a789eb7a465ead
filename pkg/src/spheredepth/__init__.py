"""Sphere depth: smoothed ball-mass data depth with a fast manifold solver.

Public surface re-exported here: core objective and grid oracles, the
Riemannian descent solver, baseline depths, test statistics, synthetic
data generators, and dataset/report I/O.
"""

__version__ = "0.1.0"

from .baselines import (
    HalfspaceConfig,
    KernelConfig,
    MahalanobisModel,
    fit_mahalanobis,
    halfspace_depth,
    kernelized_spatial_depth,
    mahalanobis_depth,
)
from .core import (
    DepthParams,
    DirectionGrid,
    OracleResult,
    SampleSet,
    grid_oracle_halfspace_depth,
    grid_oracle_sphere_depth,
    sigmoid,
    sigmoid_derivative,
    sphere_loss,
    sphere_loss_gradient,
    unit_direction,
)
from .datagen import (
    MixtureSpec,
    StandardizationStats,
    StudentSpec,
    bi_gaussian_spec,
    gen_mixture,
    gen_student_t,
    gen_truncated_gaussian,
    mixture_density,
    standardize,
)
from .io import ExperimentReport, LabeledDataset, load_features_csv, load_labeled_csv
from .optim import (
    DepthResult,
    OptimizerConfig,
    batch_depth,
    default_params,
    exp_map,
    riemannian_descent,
    sphere_depth,
    tangent_project,
)
from .stats import (
    QualityIndexResult,
    RankCorrelationResult,
    RocResult,
    auroc,
    homogeneity_test,
    kendall_tau,
    quality_index,
    rank_correlations,
    spearman,
)

__all__ = [
    "__version__",
    "SampleSet",
    "DepthParams",
    "DirectionGrid",
    "OracleResult",
    "unit_direction",
    "sigmoid",
    "sigmoid_derivative",
    "sphere_loss",
    "sphere_loss_gradient",
    "grid_oracle_sphere_depth",
    "grid_oracle_halfspace_depth",
    "OptimizerConfig",
    "DepthResult",
    "tangent_project",
    "exp_map",
    "riemannian_descent",
    "default_params",
    "sphere_depth",
    "batch_depth",
    "HalfspaceConfig",
    "MahalanobisModel",
    "KernelConfig",
    "halfspace_depth",
    "fit_mahalanobis",
    "mahalanobis_depth",
    "kernelized_spatial_depth",
    "QualityIndexResult",
    "RankCorrelationResult",
    "RocResult",
    "quality_index",
    "homogeneity_test",
    "spearman",
    "kendall_tau",
    "rank_correlations",
    "auroc",
    "MixtureSpec",
    "StudentSpec",
    "StandardizationStats",
    "bi_gaussian_spec",
    "gen_mixture",
    "gen_student_t",
    "gen_truncated_gaussian",
    "mixture_density",
    "standardize",
    "ExperimentReport",
    "LabeledDataset",
    "load_labeled_csv",
    "load_features_csv",
]
