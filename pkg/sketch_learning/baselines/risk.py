"""
Empirical risks R(θ | X) = (1/n) Σ L(θ | x_i) for the four tasks.

All four are minimizations. For PCA the loss is the *negative* captured
energy −Σ_ℓ |xᵀu_ℓ|², so a better subspace gives a lower risk.
"""

from typing import Union

import numpy as np
from scipy.spatial.distance import cdist

from sketch_learning.baselines.em import gmm_log_likelihood
from sketch_learning.core.errors import InvalidArgumentError
from sketch_learning.core.models import CentroidModel, GmmModel, LowRankPsd, RegressionModel, Task

Params = Union[CentroidModel, GmmModel, LowRankPsd, RegressionModel, np.ndarray]


def empirical_risk(task: Union[Task, str], params: Params, data: np.ndarray) -> float:
    task = Task(task)
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[0] == 0:
        raise InvalidArgumentError("empirical risk needs a non-empty (n, d) array")

    if task is Task.KMEANS:
        centers = params.centroids if isinstance(params, CentroidModel) else np.asarray(params)
        return float(cdist(data, centers, "sqeuclidean").min(axis=1).mean())

    if task is Task.GMM:
        if not isinstance(params, GmmModel):
            raise InvalidArgumentError("GMM risk needs a GmmModel")
        return float(-gmm_log_likelihood(data, params.weights, params.means, params.variances).mean())

    if task is Task.PCA:
        basis = params.subspace() if isinstance(params, LowRankPsd) else np.asarray(params, dtype=float)
        return float(-np.sum((data @ basis) ** 2) / data.shape[0])

    theta = params.theta if isinstance(params, RegressionModel) else np.asarray(params, dtype=float)
    d1 = theta.shape[0]
    if data.shape[1] != d1 + theta.shape[1]:
        raise InvalidArgumentError(f"regression data must have {d1 + theta.shape[1]} columns")
    residual = data[:, :d1] - data[:, d1:] @ theta.T
    return float(np.sum(residual**2) / data.shape[0])


def parzen_score(data: np.ndarray, c: np.ndarray, sigma: float) -> Union[float, np.ndarray]:
    """
    Parzen window estimate (1/n) Σ exp(−‖c − x_i‖²/2σ²).

    ``c`` may be one point (d,) or a batch (g, d); a batch returns (g,) scores.
    """
    if sigma <= 0:
        raise InvalidArgumentError(f"sigma must be positive, got {sigma}")
    data = np.asarray(data, dtype=float)
    points = np.atleast_2d(np.asarray(c, dtype=float))
    scores = np.exp(-cdist(points, data, "sqeuclidean") / (2.0 * sigma**2)).mean(axis=1)
    return float(scores[0]) if np.ndim(c) == 1 else scores
