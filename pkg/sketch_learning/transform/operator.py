"""
Random linear stage W of the feature maps.

Two families share one interface:

- dense: an m×d matrix of iid N(0, sigma_w²) coefficients.
- structured: b = ceil(m / d_pad) square blocks
  ``sigma_w · D0 · d_pad^(-3/2) · H D1 H D2 H D3`` applied to the zero-padded
  input, with Rademacher D1..D3, chi(d_pad) D0 and H the Walsh–Hadamard
  matrix. The three-Hadamard product is orthogonal after the d_pad^(-3/2)
  factor, so row norms follow the chi(d_pad) law of Gaussian rows.

Operators are regenerated from ``OperatorParams`` (never stored) and are
immutable once built, so ``apply`` is safe from any number of threads.
"""

import hashlib
from functools import cached_property
from typing import Optional

import numpy as np

from sketch_learning._logging import SketchLearningLogger
from sketch_learning.core.errors import InvalidArgumentError
from sketch_learning.core.models import OperatorKind, OperatorParams
from sketch_learning.core.random import stream
from sketch_learning.transform.hadamard import fwht

logger = SketchLearningLogger.get(__name__)


def _check_shape(m: int, d: int, sigma_w: float) -> None:
    if int(m) < 1 or int(d) < 1:
        raise InvalidArgumentError(f"operator dimensions must be >= 1, got m={m}, d={d}")
    if not np.isfinite(sigma_w) or sigma_w <= 0:
        raise InvalidArgumentError(f"sigma_w must be positive, got {sigma_w}")


class FrequencyOperator:
    """The linear map x ↦ Wx, dense or structured."""

    def __init__(
        self,
        params: OperatorParams,
        dense: Optional[np.ndarray] = None,
        chi: Optional[np.ndarray] = None,
        signs: Optional[np.ndarray] = None,
    ):
        self.params = params
        self._dense = dense
        self._chi = chi
        self._signs = signs
        for arr in (dense, chi, signs):
            if arr is not None:
                arr.setflags(write=False)

    # ------------------------------------------------------------ properties

    @property
    def kind(self) -> OperatorKind:
        return self.params.kind

    @property
    def m(self) -> int:
        return self.params.m

    @property
    def d(self) -> int:
        return self.params.d

    @property
    def d_pad(self) -> int:
        return self.params.d_pad

    @property
    def sigma_w(self) -> float:
        return self.params.sigma_w

    @property
    def coefficients(self) -> np.ndarray:
        """Dense coefficient array (m, d); only for dense operators."""
        if self._dense is None:
            raise InvalidArgumentError("structured operators have no stored coefficients")
        return self._dense

    @property
    def chi_diagonals(self) -> np.ndarray:
        if self._chi is None:
            raise InvalidArgumentError("dense operators have no block diagonals")
        return self._chi

    @property
    def sign_diagonals(self) -> np.ndarray:
        """Rademacher diagonals, shape (b, 3, d_pad) ordered D1, D2, D3."""
        if self._signs is None:
            raise InvalidArgumentError("dense operators have no block diagonals")
        return self._signs

    @cached_property
    def matrix(self) -> np.ndarray:
        """Materialized W, shape (m, d). Structured operators build it once on demand."""
        if self._dense is not None:
            return self._dense
        w = self.apply_batch(np.eye(self.d)).T.copy()
        w.setflags(write=False)
        return w

    # ----------------------------------------------------------------- apply

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Return Wx for a single vector of length d."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.d,):
            raise InvalidArgumentError(f"expected a vector of length {self.d}, got shape {x.shape}")
        return self.apply_batch(x[None, :])[0]

    def apply_batch(self, x: np.ndarray) -> np.ndarray:
        """Return X Wᵀ for a block of rows, shape (n, d) -> (n, m)."""
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.d:
            raise InvalidArgumentError(
                f"expected rows of length {self.d}, got block of shape {x.shape}"
            )
        if self._dense is not None:
            return x @ self._dense.T
        return self._apply_structured(x)

    def _apply_structured(self, x: np.ndarray) -> np.ndarray:
        n = x.shape[0]
        d_pad, n_blocks = self.d_pad, self.params.n_blocks
        padded = np.zeros((n, d_pad))
        padded[:, : self.d] = x
        signs = self.sign_diagonals
        # (n, b, d_pad): every block sees the same padded input
        y = padded[:, None, :] * signs[None, :, 2, :]
        fwht(y, inplace=True)
        y *= signs[None, :, 1, :]
        fwht(y, inplace=True)
        y *= signs[None, :, 0, :]
        fwht(y, inplace=True)
        y *= (self.sigma_w * d_pad**-1.5) * self.chi_diagonals[None, :, :]
        return y.reshape(n, n_blocks * d_pad)[:, : self.m]


# ------------------------------------------------------------------- builders


def build_dense(m: int, d: int, sigma_w: float, seed: int) -> FrequencyOperator:
    """Dense operator with iid N(0, sigma_w²) rows, drawn row-major from the seed."""
    _check_shape(m, d, sigma_w)
    params = OperatorParams(
        kind=OperatorKind.DENSE, m=int(m), d=int(d), sigma_w=float(sigma_w), seed=int(seed)
    )
    m, d = params.m, params.d
    rng = stream(seed, "operator")
    coefficients = rng.standard_normal((m, d)) * sigma_w
    logger.debug("operator.dense: m=%d d=%d sigma_w=%g seed=%d", m, d, sigma_w, seed)
    return FrequencyOperator(params, dense=coefficients)


def build_structured(m: int, d: int, sigma_w: float, seed: int) -> FrequencyOperator:
    """Structured Hadamard-block operator, see module docstring for the block recipe."""
    _check_shape(m, d, sigma_w)
    params = OperatorParams(
        kind=OperatorKind.STRUCTURED, m=int(m), d=int(d), sigma_w=float(sigma_w), seed=int(seed)
    )
    d_pad, n_blocks = params.d_pad, params.n_blocks
    rng = stream(seed, "operator")
    chi = np.empty((n_blocks, d_pad))
    signs = np.empty((n_blocks, 3, d_pad))
    for block in range(n_blocks):
        chi[block] = np.linalg.norm(rng.standard_normal((d_pad, d_pad)), axis=1)
        signs[block] = rng.integers(0, 2, size=(3, d_pad)) * 2.0 - 1.0
    logger.debug(
        "operator.structured: m=%d d=%d d_pad=%d blocks=%d sigma_w=%g seed=%d",
        m,
        d,
        d_pad,
        n_blocks,
        sigma_w,
        seed,
    )
    return FrequencyOperator(params, chi=chi, signs=signs)


def build_operator(params: OperatorParams) -> FrequencyOperator:
    """Regenerate an operator from its parameters."""
    if params.is_explicit:
        raise InvalidArgumentError("explicit operators can't be regenerated from parameters")
    if params.kind is OperatorKind.DENSE:
        return build_dense(params.m, params.d, params.sigma_w, params.seed)
    return build_structured(params.m, params.d, params.sigma_w, params.seed)


def from_coefficients(w: np.ndarray, sigma_w: float = 1.0) -> FrequencyOperator:
    """
    Wrap a hand-supplied dense matrix (tests, identity maps).

    The coefficients' digest enters the parameters so the map fingerprint
    still changes with every coefficient; such operators can't be serialized.
    """
    w = np.array(w, dtype=float, copy=True)
    if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
        raise InvalidArgumentError(f"coefficients must be a non-empty 2-D array, got {w.shape}")
    digest = hashlib.sha256(np.ascontiguousarray(w, dtype="<f8").tobytes()).hexdigest()
    params = OperatorParams(
        kind=OperatorKind.DENSE,
        m=w.shape[0],
        d=w.shape[1],
        sigma_w=sigma_w,
        seed=0,
        explicit_digest=f"{w.shape[0]}x{w.shape[1]}:{digest}",
    )
    return FrequencyOperator(params, dense=w)


def apply(op: FrequencyOperator, x: np.ndarray) -> np.ndarray:
    """Functional form of :meth:`FrequencyOperator.apply`."""
    return op.apply(x)
