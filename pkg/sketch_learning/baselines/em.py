"""Expectation-maximization for diagonal-covariance Gaussian mixtures."""

import numpy as np
from scipy.special import logsumexp

from sketch_learning._logging import SketchLearningLogger
from sketch_learning.baselines.lloyd import lloyd_kmeans
from sketch_learning.core.errors import InvalidArgumentError, NumericalError
from sketch_learning.core.models import GmmModel

logger = SketchLearningLogger.get(__name__)

_LOG_2PI = np.log(2.0 * np.pi)


def component_log_density(data: np.ndarray, means: np.ndarray, variances: np.ndarray) -> np.ndarray:
    """log N(x_i; μ_ℓ, diag σ²_ℓ), shape (n, k)."""
    diff2 = (data[:, None, :] - means[None, :, :]) ** 2
    return -0.5 * (
        np.sum(diff2 / variances[None, :, :], axis=2)
        + np.sum(np.log(variances), axis=1)[None, :]
        + data.shape[1] * _LOG_2PI
    )


def gmm_log_likelihood(data: np.ndarray, weights: np.ndarray, means: np.ndarray, variances: np.ndarray) -> np.ndarray:
    """Per-sample log p(x_i), shape (n,)."""
    with np.errstate(divide="ignore"):
        log_weights = np.log(weights)
    return logsumexp(component_log_density(data, means, variances) + log_weights[None, :], axis=1)


def em_gmm(
    data: np.ndarray,
    k: int,
    seed: int = 0,
    max_iter: int = 300,
    tolerance: float = 1e-8,
    variance_floor: float = 1e-8,
    return_trace: bool = False,
):
    """
    Fit a diagonal GMM by EM, initialized from a seeded Lloyd run.

    The mean log-likelihood must not decrease between iterations; the
    returned objective is the negative mean log-likelihood.
    """
    data = np.asarray(data, dtype=float)
    n, d = data.shape
    if not 1 <= k <= n:
        raise InvalidArgumentError(f"k must be in [1, {n}], got {k}")

    init = lloyd_kmeans(data, k, seed=seed)
    means = init.centroids.copy()
    labels = np.argmin(((data[:, None, :] - means[None]) ** 2).sum(axis=2), axis=1)
    variances = np.empty((k, d))
    overall = np.maximum(data.var(axis=0), variance_floor)
    for j in range(k):
        members = data[labels == j]
        variances[j] = np.maximum(members.var(axis=0), variance_floor) if members.shape[0] > 1 else overall
    weights = np.full(k, 1.0 / k)

    trace: list[float] = []
    for iteration in range(max_iter):
        weighted = component_log_density(data, means, variances)
        with np.errstate(divide="ignore"):
            weighted = weighted + np.log(weights)[None, :]
        log_norm = logsumexp(weighted, axis=1)
        ll = float(log_norm.mean())
        if trace and ll < trace[-1] - 1e-10 * max(1.0, abs(trace[-1])):
            raise NumericalError(f"em: log-likelihood decreased from {trace[-1]!r} to {ll!r}")
        trace.append(ll)
        if len(trace) > 1 and ll - trace[-2] <= tolerance * max(1.0, abs(trace[-2])):
            break

        resp = np.exp(weighted - log_norm[:, None])
        counts = resp.sum(axis=0)
        alive = counts > 0
        weights = counts / n
        means[alive] = (resp.T @ data)[alive] / counts[alive, None]
        second = (resp.T @ data**2)[alive] / counts[alive, None]
        variances[alive] = np.maximum(second - means[alive] ** 2, variance_floor)
        logger.debug("em.iteration: t=%d loglik=%.10g", iteration, ll)

    model = GmmModel(weights=weights / weights.sum(), means=means, variances=variances, objective=-trace[-1]).canonical()
    if return_trace:
        return model, trace
    return model
