"""
Closed-form mean kernels and MMD for Gaussian mixtures.

For the Gaussian kernel κ(x, y) = exp(−‖x − y‖²/2s²) and diagonal Gaussians
p = N(μ₁, diag v₁), q = N(μ₂, diag v₂):

    k(p, q) = Π_t √(s² / (s² + v₁t + v₂t)) · exp(−(μ₁t − μ₂t)² / 2(s² + v₁t + v₂t))

Mixtures expand bilinearly and MMD² = k(p,p) + k(q,q) − 2k(p,q). Zero
variances are allowed and give Diracs.
"""

from typing import Union

import numpy as np
from scipy.ndimage import label, maximum_filter

from sketch_learning.core.errors import InvalidArgumentError
from sketch_learning.core.models import GmmModel

Distribution = Union[GmmModel, tuple[np.ndarray, np.ndarray]]


def _components(p: Distribution) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if isinstance(p, GmmModel):
        return p.weights, p.means, p.variances
    mu, var = (np.atleast_2d(np.asarray(a, dtype=float)) for a in p)
    if mu.shape != var.shape or np.any(var < 0):
        raise InvalidArgumentError("a single Gaussian is (mean, variance) with matching shapes and variance >= 0")
    return np.ones(1), mu, var


def mean_kernel(p: Distribution, q: Distribution, sigma: float) -> float:
    if sigma <= 0:
        raise InvalidArgumentError(f"sigma must be positive, got {sigma}")
    wp, mp, vp = _components(p)
    wq, mq, vq = _components(q)
    s2 = sigma * sigma
    total = s2 + vp[:, None, :] + vq[None, :, :]
    diff2 = (mp[:, None, :] - mq[None, :, :]) ** 2
    pair = np.prod(np.sqrt(s2 / total), axis=2) * np.exp(-0.5 * np.sum(diff2 / total, axis=2))
    return float(wp @ pair @ wq)


def mmd_gaussian_closed_form(p: Distribution, q: Distribution, sigma: float) -> float:
    """MMD between two (mixtures of) diagonal Gaussians under a Gaussian kernel of width sigma."""
    squared = mean_kernel(p, p, sigma) + mean_kernel(q, q, sigma) - 2.0 * mean_kernel(p, q, sigma)
    return float(np.sqrt(max(squared, 0.0)))


def count_local_maxima(grid: np.ndarray, min_height: float = 0.1) -> int:
    """
    Count local maxima of a 2-D surface over 8-neighborhoods.

    Maxima lower than ``min_height`` of the way from the surface minimum to
    its maximum are ignored; plateaus count once per connected run.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 2:
        raise InvalidArgumentError("count_local_maxima expects a 2-D grid")
    lo, hi = float(grid.min()), float(grid.max())
    if hi == lo:
        return 1
    peaks = (grid == maximum_filter(grid, size=3, mode="constant", cval=-np.inf)) & (
        grid >= lo + min_height * (hi - lo)
    )
    _, count = label(peaks, structure=np.ones((3, 3)))
    return int(count)
