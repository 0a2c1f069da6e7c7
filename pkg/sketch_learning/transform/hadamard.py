"""Fast Walsh–Hadamard transform."""

import numpy as np

from sketch_learning.core.errors import InvalidArgumentError


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def fwht(v: np.ndarray, inplace: bool = False) -> np.ndarray:
    """
    Multiply by the unnormalized Sylvester–Hadamard matrix along the last axis.

    Works on a single vector or a stack of vectors (``(..., d)``) in
    O(d log d) per vector. With ``inplace=True`` and a C-contiguous float64
    input the butterflies overwrite ``v`` itself.

    Raises:
        InvalidArgumentError: if the last axis is not a power of two.
    """
    if inplace and isinstance(v, np.ndarray) and v.dtype == np.float64 and v.flags.c_contiguous:
        x = v
    else:
        x = np.array(v, dtype=float, copy=True, order="C")
    d = x.shape[-1] if x.ndim else 0
    if not is_power_of_two(d):
        raise InvalidArgumentError(f"fwht needs a power-of-two length, got {d}")

    lead = x.shape[:-1]
    h = 1
    while h < d:
        # butterflies pair index i with i + h inside blocks of 2h
        view = x.reshape(*lead, d // (2 * h), 2, h)
        top = view[..., 0, :].copy()
        bottom = view[..., 1, :]
        view[..., 0, :] += bottom
        view[..., 1, :] = top - bottom
        h *= 2
    return x
