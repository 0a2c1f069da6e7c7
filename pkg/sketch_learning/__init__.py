"""
Compressive learning from sketches.

Compress a dataset into a fixed-size sketch of averaged random features in a
single streaming pass, then recover k-means centroids, Gaussian mixtures,
principal subspaces or linear regressors from the sketch alone.
"""

from sketch_learning._logging import SketchLearningLogger
from sketch_learning.core import (
    CentroidModel,
    GmmModel,
    LowRankPsd,
    MapKind,
    OperatorKind,
    RegressionModel,
    SolverOptions,
    Task,
)
from sketch_learning.features import FeatureMapSpec
from sketch_learning.privacy import privatize_gaussian, privatize_laplace, sensitivity
from sketch_learning.sketching import Sketch, delete, load, merge, save, sketch_dataset, update
from sketch_learning.solvers import clomp_gmm, clomp_kmeans, fit_lowrank_psd, ls_regression, sketch_cost

__all__ = [
    "CentroidModel",
    "FeatureMapSpec",
    "GmmModel",
    "LowRankPsd",
    "MapKind",
    "OperatorKind",
    "RegressionModel",
    "Sketch",
    "SketchLearningLogger",
    "SolverOptions",
    "Task",
    "clomp_gmm",
    "clomp_kmeans",
    "delete",
    "fit_lowrank_psd",
    "load",
    "ls_regression",
    "merge",
    "privatize_gaussian",
    "privatize_laplace",
    "save",
    "sensitivity",
    "sketch_cost",
    "sketch_dataset",
    "update",
]
