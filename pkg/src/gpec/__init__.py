"""Weighted ensemble clustering with a min-max kernel objective.

The pipeline turns a pool of base clusterings into co-association
kernels, builds a high-confidence surrogate of the ideal similarity,
learns per-partition weights by reduced gradient descent and clusters the
resulting spectral embedding.  :mod:`gpec.theory` evaluates the
accompanying generalisation bounds and runs the excess-risk scaling
experiment.
"""

from .coassoc import ca_matrix, partition_kernel, similarity_of, weighted_kernel
from .confidence import DEFAULT_ALPHA, high_confidence, second_order
from .consensus import ConsensusResult, KMeansConfig, kmeans, run_pipeline
from .metrics import MetricsReport, ari, evaluate, nmi, pairwise_f, purity, threshold_pr_curve
from .minmax import OptimizerConfig, OptimizerState, grad_j, objective, optimize, top_k_eigvecs
from .partitions import (
    Dataset,
    Partition,
    Pool,
    compact,
    derive_seed,
    generate_pool,
    load_dataset,
    load_pool,
    save_pool,
)
from .theory import (
    BoundParams,
    bias_diversity,
    excess_risk_bound,
    excess_risk_experiment,
    generalization_bound,
)

__version__ = "0.1.0"

__all__ = [
    "BoundParams",
    "ConsensusResult",
    "DEFAULT_ALPHA",
    "Dataset",
    "KMeansConfig",
    "MetricsReport",
    "OptimizerConfig",
    "OptimizerState",
    "Partition",
    "Pool",
    "ari",
    "bias_diversity",
    "ca_matrix",
    "compact",
    "derive_seed",
    "evaluate",
    "excess_risk_bound",
    "excess_risk_experiment",
    "generalization_bound",
    "generate_pool",
    "grad_j",
    "high_confidence",
    "kmeans",
    "load_dataset",
    "load_pool",
    "nmi",
    "objective",
    "optimize",
    "pairwise_f",
    "partition_kernel",
    "purity",
    "run_pipeline",
    "save_pool",
    "second_order",
    "similarity_of",
    "threshold_pr_curve",
    "top_k_eigvecs",
    "weighted_kernel",
]
