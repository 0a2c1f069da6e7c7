"""
Protocols shared across the package.

A row source feeds the sketcher, an atom family tells the greedy solver how to
evaluate and differentiate one parametric component of a mixture.
"""

from collections.abc import Iterator
from typing import Protocol

import numpy as np


class IRowSource(Protocol):
    """Anything that yields the dataset as 2-D float blocks of shape (rows, d)."""

    def blocks(self) -> Iterator[np.ndarray]:
        """Yield successive row blocks; every block has the same number of columns."""
        ...


class IAtomFamily(Protocol):
    """
    One parametric component family for sketch fitting.

    Parameters of a single atom are packed into a flat real vector of length
    ``n_params``; the solver never looks inside it.
    """

    n_params: int

    def atom(self, theta: np.ndarray) -> np.ndarray:
        """Noiseless sketch of one component, shape (m,)."""
        ...

    def jacobian(self, theta: np.ndarray) -> np.ndarray:
        """Derivative of :meth:`atom` w.r.t. ``theta``, shape (m, n_params)."""
        ...

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Lower/upper bounds for ``theta``."""
        ...

    def random_init(self, rng: np.random.Generator) -> np.ndarray:
        """Draw a starting point for the candidate search."""
        ...
