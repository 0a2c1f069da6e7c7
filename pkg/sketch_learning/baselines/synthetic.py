"""Seeded isotropic Gaussian mixtures used as benchmark data."""

from typing import NamedTuple

import numpy as np

from sketch_learning._logging import SketchLearningLogger
from sketch_learning.core.errors import InvalidArgumentError
from sketch_learning.core.models import GmmModel, SyntheticSpec
from sketch_learning.core.random import stream

logger = SketchLearningLogger.get(__name__)

MAX_PLACEMENT_RETRIES = 1000


class SyntheticDataset(NamedTuple):
    data: np.ndarray
    labels: np.ndarray
    truth: GmmModel


def place_centroids(spec: SyntheticSpec, rng: np.random.Generator) -> np.ndarray:
    """Rejection-sample k centers in [−h, h]^d, pairwise at least separation·sigma apart."""
    h = spec.resolved_half_width
    min_distance = spec.separation * spec.sigma
    centers = np.empty((spec.k, spec.d))
    for i in range(spec.k):
        for _ in range(MAX_PLACEMENT_RETRIES):
            candidate = rng.uniform(-h, h, spec.d)
            if i == 0 or np.min(np.linalg.norm(centers[:i] - candidate, axis=1)) >= min_distance:
                centers[i] = candidate
                break
        else:
            raise InvalidArgumentError(
                f"couldn't place {spec.k} centers {min_distance:g} apart inside [-{h:g}, {h:g}]^{spec.d}; "
                "lower the separation or widen the box"
            )
    return centers


def synth_gmm(spec: SyntheticSpec) -> SyntheticDataset:
    """Draw n samples: a component per the weights, then N(μ_ℓ, σ²I)."""
    rng = stream(spec.seed, "synthetic")
    centers = place_centroids(spec, rng)
    weights = np.asarray(spec.weights if spec.weights is not None else np.full(spec.k, 1.0 / spec.k))
    weights = weights / weights.sum()
    labels = rng.choice(spec.k, size=spec.n, p=weights)
    data = centers[labels] + spec.sigma * rng.standard_normal((spec.n, spec.d))
    truth = GmmModel(weights=weights, means=centers, variances=np.full((spec.k, spec.d), spec.sigma**2))
    logger.debug("synthetic.done: k=%d d=%d n=%d seed=%d", spec.k, spec.d, spec.n, spec.seed)
    return SyntheticDataset(data=data, labels=labels, truth=truth)
