"""Transportable DAG structure learning with differentiable acyclicity scores."""

from .adjacency import (
    BinaryDag,
    BinaryGraph,
    acyclicity_penalty,
    acyclicity_penalty_grad,
    is_acyclic,
    matrix_exp,
    threshold_edges,
)
from .config import ExperimentConfig
from .ensemble import (
    DagEnsemble,
    combine_graphs,
    mean_adjacency,
    mse_regularizer,
    transportability_check,
)
from .errors import InvalidInputError, OptimizationDiverged
from .metrics import MetricsReport, confusion_rates, shd
from .optim import (
    BoxBounds,
    DualAscentConfig,
    LbfgsSettings,
    dual_ascent_train,
    minimize_lbfgsb,
    training_step,
)
from .scores import LinearScore, MlpScore, ScoreHyper, make_score
from .seeding import derive_seed
from .subsample import (
    BetaSpec,
    SubsetPartition,
    beta_family,
    beta_partition,
    draw_subsets,
    random_split,
    reindex_sort,
    subset_probabilities,
)
from .synthdata import (
    GraphSpec,
    SemSystem,
    sample_er_dag,
    sample_index_model,
    sample_sf_dag,
    simulate,
)

__version__ = "0.1.0"

__all__ = [
    "BinaryDag",
    "BinaryGraph",
    "BetaSpec",
    "BoxBounds",
    "DagEnsemble",
    "DualAscentConfig",
    "ExperimentConfig",
    "GraphSpec",
    "InvalidInputError",
    "LbfgsSettings",
    "LinearScore",
    "MetricsReport",
    "MlpScore",
    "OptimizationDiverged",
    "ScoreHyper",
    "SemSystem",
    "SubsetPartition",
    "acyclicity_penalty",
    "acyclicity_penalty_grad",
    "beta_family",
    "beta_partition",
    "combine_graphs",
    "confusion_rates",
    "derive_seed",
    "draw_subsets",
    "dual_ascent_train",
    "is_acyclic",
    "make_score",
    "matrix_exp",
    "mean_adjacency",
    "minimize_lbfgsb",
    "mse_regularizer",
    "random_split",
    "reindex_sort",
    "sample_er_dag",
    "sample_index_model",
    "sample_sf_dag",
    "shd",
    "simulate",
    "subset_probabilities",
    "threshold_edges",
    "training_step",
    "transportability_check",
]
