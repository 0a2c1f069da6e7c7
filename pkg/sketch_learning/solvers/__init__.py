"""Recover task parameters from sketches."""

from sketch_learning.solvers.clomp import Clomp, clomp_gmm, clomp_kmeans
from sketch_learning.solvers.cost import decoding_target, selection_criterion, sketch_cost
from sketch_learning.solvers.descent import DescentResult, armijo_descent
from sketch_learning.solvers.families import DiracFamily, GaussianFamily
from sketch_learning.solvers.lowrank import fit_lowrank_psd, lowrank_objective, recovered_subspace
from sketch_learning.solvers.nnls import nnls
from sketch_learning.solvers.regression import autocorrelation, ls_regression

__all__ = [
    "Clomp",
    "DescentResult",
    "DiracFamily",
    "GaussianFamily",
    "armijo_descent",
    "autocorrelation",
    "clomp_gmm",
    "clomp_kmeans",
    "decoding_target",
    "fit_lowrank_psd",
    "ls_regression",
    "lowrank_objective",
    "nnls",
    "recovered_subspace",
    "selection_criterion",
    "sketch_cost",
]
