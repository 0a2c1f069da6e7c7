"""Nonnegative least squares over possibly complex atom matrices."""

import numpy as np
from scipy.optimize import nnls as _scipy_nnls

from sketch_learning.core.errors import InvalidArgumentError, NumericalError


def as_real_system(atoms: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Stack real and imaginary parts so a complex fit becomes an ordinary real one."""
    if np.iscomplexobj(atoms) or np.iscomplexobj(target):
        atoms = np.vstack([atoms.real, atoms.imag])
        target = np.concatenate([np.real(target), np.imag(target)])
    return np.asarray(atoms, dtype=float), np.asarray(target, dtype=float)


def nnls(atoms: np.ndarray, target: np.ndarray) -> np.ndarray:
    """
    argmin ‖target − atoms·α‖² subject to α ≥ 0.

    Args:
        atoms: (m, t) real or complex matrix, one atom per column.
        target: (m,) real or complex vector.

    Returns:
        The t nonnegative weights.
    """
    atoms = np.asarray(atoms)
    target = np.asarray(target)
    if atoms.ndim != 2 or atoms.shape[1] < 1:
        raise InvalidArgumentError(f"need an (m, t) atom matrix with t >= 1, got shape {atoms.shape}")
    if target.shape != (atoms.shape[0],):
        raise InvalidArgumentError(f"target shape {target.shape} doesn't match {atoms.shape[0]} rows")
    a, b = as_real_system(atoms, target)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise NumericalError("nnls received non-finite atoms or target")
    alpha, _ = _scipy_nnls(a, b, maxiter=50 * a.shape[1] + 100)
    return alpha
