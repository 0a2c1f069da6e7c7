"""Lloyd's k-means with k-means++ seeding."""

import numpy as np
from scipy.spatial.distance import cdist

from sketch_learning._logging import SketchLearningLogger
from sketch_learning.core.errors import InvalidArgumentError, NumericalError
from sketch_learning.core.models import CentroidModel
from sketch_learning.core.random import stream

logger = SketchLearningLogger.get(__name__)


def kmeans_plusplus(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = data.shape[0]
    centers = np.empty((k, data.shape[1]))
    centers[0] = data[rng.integers(n)]
    closest = cdist(data, centers[:1], "sqeuclidean")[:, 0]
    for i in range(1, k):
        total = closest.sum()
        idx = rng.choice(n, p=closest / total) if total > 0 else rng.integers(n)
        centers[i] = data[idx]
        closest = np.minimum(closest, cdist(data, centers[i : i + 1], "sqeuclidean")[:, 0])
    return centers


def sse(data: np.ndarray, centers: np.ndarray) -> float:
    """Sum of squared distances to the nearest center."""
    return float(cdist(data, centers, "sqeuclidean").min(axis=1).sum())


def lloyd_kmeans(
    data: np.ndarray,
    k: int,
    seed: int = 0,
    max_iter: int = 300,
    return_trace: bool = False,
):
    """
    Lloyd iterations until the assignment stops changing or ``max_iter``.

    Empty clusters are reseeded at the point farthest from its center. The
    returned model's weights are cluster proportions and its objective is the
    mean squared distance. With ``return_trace`` the per-iteration SSE values
    are returned as well.
    """
    data = np.asarray(data, dtype=float)
    n = data.shape[0]
    if data.ndim != 2 or n == 0:
        raise InvalidArgumentError("lloyd_kmeans needs a non-empty (n, d) array")
    if not 1 <= k <= n:
        raise InvalidArgumentError(f"k must be in [1, {n}], got {k}")

    rng = stream(seed, "baseline")
    centers = kmeans_plusplus(data, k, rng)
    labels = np.full(n, -1)
    trace: list[float] = []

    for iteration in range(max_iter):
        dist = cdist(data, centers, "sqeuclidean")
        new_labels = dist.argmin(axis=1)
        current = float(dist[np.arange(n), new_labels].sum())
        if trace and current > trace[-1] * (1 + 1e-12) + 1e-12:
            raise NumericalError(f"lloyd: SSE increased from {trace[-1]!r} to {current!r}")
        trace.append(current)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels

        for j in range(k):
            members = labels == j
            if members.any():
                centers[j] = data[members].mean(axis=0)
            else:
                own = cdist(data, centers, "sqeuclidean")[np.arange(n), labels]
                far = int(own.argmax())
                centers[j] = data[far]
                labels[far] = j
        logger.debug("lloyd.iteration: t=%d sse=%.6g", iteration, current)

    final = cdist(data, centers, "sqeuclidean")
    labels = final.argmin(axis=1)
    counts = np.bincount(labels, minlength=k).astype(float)
    model = CentroidModel(
        centroids=centers, weights=counts / n, objective=float(final.min(axis=1).mean())
    ).canonical()
    if return_trace:
        return model, trace
    return model
