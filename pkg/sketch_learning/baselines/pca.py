"""Exact PCA on raw data: the reference that sketched PCA is measured against."""

import numpy as np
import scipy.linalg

from sketch_learning.core.errors import InvalidArgumentError


def empirical_autocorrelation(data: np.ndarray) -> np.ndarray:
    data = np.asarray(data, dtype=float)
    return data.T @ data / data.shape[0]


def exact_pca(data: np.ndarray, k: int) -> np.ndarray:
    """
    Top-k eigenvectors of R̂ = (1/n) Σ x xᵀ as a (d, k) orthonormal basis.

    Columns follow descending eigenvalue; each column's largest-magnitude
    entry is positive.
    """
    data = np.asarray(data, dtype=float)
    d = data.shape[1]
    if not 1 <= k <= d:
        raise InvalidArgumentError(f"k must be in [1, {d}], got {k}")
    eigenvalues, eigenvectors = scipy.linalg.eigh(empirical_autocorrelation(data))
    order = np.argsort(eigenvalues)[::-1][:k]
    basis = eigenvectors[:, order]
    pivots = np.argmax(np.abs(basis), axis=0)
    signs = np.sign(basis[pivots, np.arange(k)])
    signs[signs == 0] = 1.0
    return basis * signs


def principal_angles(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Principal angles (radians) between the column spaces of a and b."""
    return scipy.linalg.subspace_angles(a, b)
