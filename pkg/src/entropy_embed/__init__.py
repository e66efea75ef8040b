"""Directed-dependency estimation for multivariate time series.

The package builds non-uniform embeddings by greedy candidate selection and
scores directed links with a conditional transfer entropy estimator based on
k-nearest-neighbor statistics.  Four selection/termination algorithms are
provided (prediction-driven, bootstrap, link-analysis, information-criterion)
together with synthetic benchmark systems and a grid runner.
"""

from .benchmark import (
    BenchmarkResult,
    BenchmarkRow,
    ConfusionCounts,
    GridSpec,
    RealizationRecord,
    VariantSpec,
    load_grid,
    run_grid,
    score,
    write_grid_csv,
    write_realizations_csv,
)
from .data_model import (
    Candidate,
    EmbeddingState,
    MultivariateSeries,
    build_candidate_pool,
    lagged_matrix,
    normalize,
    read_series_csv,
    write_series_csv,
)
from .errors import (
    ConstantChannel,
    CsvFormatError,
    DegenerateResidual,
    Diverged,
    DomainError,
    EmptyPool,
    EntropyEmbedError,
    NotEnoughNeighbors,
    SeriesTooShort,
    ShapeMismatch,
    SingularCovariance,
)
from .estimators import KsgParams, ksg_cmi, ksg_cte, ksg_mi
from .neighbors import NeighborIndex, bulk_knn, jitter
from .nue import (
    ALGORITHMS,
    DependencyResult,
    IterationRecord,
    NueConfig,
    NueTrace,
    dependency_matrix,
    run_nue,
)
from .prediction import PredictionScore, aic_score, kde_predict, msr, nn_predict
from .simgen import GroundTruth, henon, mix, nonlinear_ar, read_truth_json, write_truth_json

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "BenchmarkResult",
    "BenchmarkRow",
    "Candidate",
    "ConfusionCounts",
    "ConstantChannel",
    "CsvFormatError",
    "DegenerateResidual",
    "DependencyResult",
    "Diverged",
    "DomainError",
    "EmbeddingState",
    "EmptyPool",
    "EntropyEmbedError",
    "GridSpec",
    "RealizationRecord",
    "GroundTruth",
    "IterationRecord",
    "KsgParams",
    "MultivariateSeries",
    "NeighborIndex",
    "NotEnoughNeighbors",
    "NueConfig",
    "NueTrace",
    "PredictionScore",
    "SeriesTooShort",
    "ShapeMismatch",
    "SingularCovariance",
    "VariantSpec",
    "aic_score",
    "build_candidate_pool",
    "bulk_knn",
    "dependency_matrix",
    "henon",
    "jitter",
    "ksg_cmi",
    "ksg_cte",
    "ksg_mi",
    "kde_predict",
    "lagged_matrix",
    "load_grid",
    "mix",
    "msr",
    "nn_predict",
    "nonlinear_ar",
    "normalize",
    "read_series_csv",
    "read_truth_json",
    "run_grid",
    "run_nue",
    "score",
    "write_grid_csv",
    "write_realizations_csv",
    "write_series_csv",
    "write_truth_json",
    "__version__",
]
