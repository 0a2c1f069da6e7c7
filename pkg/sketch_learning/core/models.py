"""
Shared data models for the sketch_learning package.

Parameter records (operator, feature map, privacy, solver options, synthetic
data) are frozen pydantic models so they hash, compare, and serialize the same
way everywhere. Recovered task parameters hold numpy arrays and validate their
invariants on construction.
"""

from enum import Enum
from typing import Any, ClassVar, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Weight-sum tolerance shared by mixture-style models.
_SIMPLEX_TOL = 1e-10


class OperatorKind(str, Enum):
    """Linear stage variants."""

    DENSE = "dense"
    STRUCTURED = "structured"


class MapKind(str, Enum):
    """Nonlinear feature map variants."""

    RFF_COMPLEX = "rff_complex"
    RFF_QUANTIZED = "rff_quantized"
    QUADRATIC = "quadratic"
    OUTER_PRODUCT = "outer_product"


class PrivacyMechanism(str, Enum):
    LAPLACE = "laplace"
    GAUSSIAN = "gaussian"


class Task(str, Enum):
    KMEANS = "kmeans"
    GMM = "gmm"
    PCA = "pca"
    REGRESS = "regress"


def next_power_of_two(d: int) -> int:
    """Smallest power of two >= d."""
    return 1 << max(0, int(d) - 1).bit_length()


class OperatorParams(BaseModel):
    """Everything needed to regenerate a frequency operator bit-identically."""

    model_config = ConfigDict(frozen=True)

    kind: OperatorKind
    m: int = Field(ge=1)
    d: int = Field(ge=1)
    sigma_w: float = Field(gt=0)
    seed: int = Field(ge=0, lt=2**64)
    # SHA-256 of hand-supplied coefficients; such operators can't be regenerated from a seed.
    explicit_digest: Optional[str] = None

    @property
    def is_explicit(self) -> bool:
        return self.explicit_digest is not None

    @property
    def d_pad(self) -> int:
        if self.kind is OperatorKind.STRUCTURED:
            return next_power_of_two(self.d)
        return self.d

    @property
    def n_blocks(self) -> int:
        return -(-self.m // self.d_pad)


class MapParams(BaseModel):
    """Defining parameters of a feature map; the fingerprint is derived from these."""

    model_config = ConfigDict(frozen=True)

    kind: MapKind
    d: int = Field(ge=1)
    operator: Optional[OperatorParams] = None
    dither_seed: Optional[int] = Field(default=None, ge=0, lt=2**64)

    @model_validator(mode="after")
    def _check_kind_fields(self) -> "MapParams":
        if self.kind is MapKind.OUTER_PRODUCT:
            if self.operator is not None:
                raise ValueError("outer_product maps take no frequency operator")
        elif self.operator is None:
            raise ValueError(f"{self.kind.value} maps need a frequency operator")
        elif self.operator.d != self.d:
            raise ValueError(f"operator input dim {self.operator.d} != map dim {self.d}")
        if self.kind is MapKind.RFF_QUANTIZED and self.dither_seed is None:
            raise ValueError("rff_quantized maps need a dither_seed")
        if self.kind is not MapKind.RFF_QUANTIZED and self.dither_seed is not None:
            raise ValueError("dither_seed only applies to rff_quantized maps")
        return self

    @property
    def m(self) -> int:
        if self.operator is None:
            return self.d * self.d
        return self.operator.m

    @property
    def is_complex(self) -> bool:
        return self.kind is MapKind.RFF_COMPLEX


class PrivacyRecord(BaseModel):
    """How a published sketch was noised."""

    model_config = ConfigDict(frozen=True)

    mechanism: PrivacyMechanism
    epsilon: float = Field(gt=0)
    delta: float = Field(default=0.0, ge=0)


class SolverOptions(BaseModel):
    """Knobs shared by the sketch-fitting solvers."""

    model_config = ConfigDict(frozen=True)

    restarts: int = Field(default=10, ge=1)
    tolerance: float = Field(default=1e-8, gt=0)
    max_refine_iterations: int = Field(default=300, ge=1)
    max_search_iterations: int = Field(default=200, ge=1)
    max_lowrank_iterations: int = Field(default=3000, ge=1)
    lower: Optional[tuple[float, ...]] = None
    upper: Optional[tuple[float, ...]] = None
    variance_floor: float = Field(default=1e-8, gt=0)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_box(self) -> "SolverOptions":
        if (self.lower is None) != (self.upper is None):
            raise ValueError("lower and upper must be given together")
        if self.lower is not None and self.upper is not None:
            if len(self.lower) != len(self.upper):
                raise ValueError("lower/upper length mismatch")
            if any(lo > hi for lo, hi in zip(self.lower, self.upper, strict=True)):
                raise ValueError("lower must not exceed upper")
        return self


class SyntheticSpec(BaseModel):
    """Seeded isotropic Gaussian mixture used as a stand-in for real datasets."""

    model_config = ConfigDict(frozen=True)

    k: int = Field(ge=1)
    d: int = Field(ge=1)
    n: int = Field(ge=1)
    separation: float = Field(default=6.0, gt=0)
    sigma: float = Field(default=1.0, gt=0)
    weights: Optional[tuple[float, ...]] = None
    box_half_width: Optional[float] = Field(default=None, gt=0)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_weights(self) -> "SyntheticSpec":
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.size != self.k or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
                raise ValueError("weights must be a k-simplex")
        return self

    @property
    def resolved_half_width(self) -> float:
        if self.box_half_width is not None:
            return self.box_half_width
        return self.separation * self.sigma * max(1.0, self.k ** (1.0 / self.d))


# ---------------------------------------------------------------- task parameters


def _as_float_array(value: Any, ndim: int) -> np.ndarray:
    arr = np.array(value, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    return arr


def _canonical_order(weights: np.ndarray, keys: np.ndarray) -> np.ndarray:
    # descending weight, ties broken by lexicographic key rows
    columns = [keys[:, j] for j in range(keys.shape[1] - 1, -1, -1)]
    return np.lexsort([*columns, -weights])


class _ArrayModel(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    task: ClassVar[Task]
    objective: Optional[float] = None

    def document(self, **provenance: Any) -> dict[str, Any]:
        raise NotImplementedError


class CentroidModel(_ArrayModel):
    """k centroids and their mixture weights."""

    task: ClassVar[Task] = Task.KMEANS

    centroids: np.ndarray
    weights: np.ndarray

    @field_validator("centroids", mode="before")
    @classmethod
    def _centroids_2d(cls, v: Any) -> np.ndarray:
        return _as_float_array(v, 2)

    @field_validator("weights", mode="before")
    @classmethod
    def _weights_1d(cls, v: Any) -> np.ndarray:
        return _as_float_array(v, 1)

    @model_validator(mode="after")
    def _check(self) -> "CentroidModel":
        k = self.centroids.shape[0]
        if k < 1 or self.weights.shape != (k,):
            raise ValueError("need k >= 1 centroids with one weight each")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > _SIMPLEX_TOL:
            raise ValueError("weights must be nonnegative and sum to 1")
        return self

    @property
    def k(self) -> int:
        return int(self.centroids.shape[0])

    @property
    def d(self) -> int:
        return int(self.centroids.shape[1])

    def canonical(self) -> "CentroidModel":
        order = _canonical_order(self.weights, self.centroids)
        return CentroidModel(
            centroids=self.centroids[order], weights=self.weights[order], objective=self.objective
        )

    def document(self, **provenance: Any) -> dict[str, Any]:
        return {
            "task": self.task.value,
            "k": self.k,
            "d": self.d,
            "weights": self.weights.tolist(),
            "centroids": self.centroids.tolist(),
            "objective": self.objective,
            **provenance,
        }


class GmmModel(_ArrayModel):
    """Diagonal-covariance Gaussian mixture."""

    task: ClassVar[Task] = Task.GMM

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    @field_validator("means", "variances", mode="before")
    @classmethod
    def _two_d(cls, v: Any) -> np.ndarray:
        return _as_float_array(v, 2)

    @field_validator("weights", mode="before")
    @classmethod
    def _one_d(cls, v: Any) -> np.ndarray:
        return _as_float_array(v, 1)

    @model_validator(mode="after")
    def _check(self) -> "GmmModel":
        k = self.means.shape[0]
        if k < 1 or self.weights.shape != (k,) or self.variances.shape != self.means.shape:
            raise ValueError("inconsistent GMM shapes")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > _SIMPLEX_TOL:
            raise ValueError("weights must be nonnegative and sum to 1")
        if np.any(self.variances <= 0):
            raise ValueError("variances must be strictly positive")
        return self

    @property
    def k(self) -> int:
        return int(self.means.shape[0])

    @property
    def d(self) -> int:
        return int(self.means.shape[1])

    def canonical(self) -> "GmmModel":
        order = _canonical_order(self.weights, self.means)
        return GmmModel(
            weights=self.weights[order],
            means=self.means[order],
            variances=self.variances[order],
            objective=self.objective,
        )

    def document(self, **provenance: Any) -> dict[str, Any]:
        return {
            "task": self.task.value,
            "k": self.k,
            "d": self.d,
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
            "objective": self.objective,
            **provenance,
        }


class LowRankPsd(_ArrayModel):
    """R = U Uᵀ, symmetric PSD of rank <= k by construction."""

    task: ClassVar[Task] = Task.PCA

    factor: np.ndarray

    @field_validator("factor", mode="before")
    @classmethod
    def _two_d(cls, v: Any) -> np.ndarray:
        return _as_float_array(v, 2)

    @property
    def k(self) -> int:
        return int(self.factor.shape[1])

    @property
    def d(self) -> int:
        return int(self.factor.shape[0])

    @property
    def matrix(self) -> np.ndarray:
        return self.factor @ self.factor.T

    def subspace(self) -> np.ndarray:
        """Orthonormal basis of the column space of U, ordered by singular value."""
        u, s, _ = np.linalg.svd(self.factor, full_matrices=False)
        return u[:, s > s.max(initial=0.0) * 1e-12] if s.size else u

    def document(self, **provenance: Any) -> dict[str, Any]:
        return {
            "task": self.task.value,
            "k": self.k,
            "d": self.d,
            "factor": self.factor.tolist(),
            "objective": self.objective,
            **provenance,
        }


class RegressionModel(_ArrayModel):
    """Linear predictor x1 ≈ theta @ x2."""

    task: ClassVar[Task] = Task.REGRESS

    theta: np.ndarray

    @field_validator("theta", mode="before")
    @classmethod
    def _two_d(cls, v: Any) -> np.ndarray:
        return _as_float_array(v, 2)

    def document(self, **provenance: Any) -> dict[str, Any]:
        return {
            "task": self.task.value,
            "d1": int(self.theta.shape[0]),
            "d2": int(self.theta.shape[1]),
            "theta": self.theta.tolist(),
            "objective": self.objective,
            **provenance,
        }


def model_from_document(doc: dict[str, Any]) -> _ArrayModel:
    """Inverse of ``document()`` for the four task models."""
    task = Task(doc["task"])
    objective = doc.get("objective")
    if task is Task.KMEANS:
        return CentroidModel(centroids=doc["centroids"], weights=doc["weights"], objective=objective)
    if task is Task.GMM:
        return GmmModel(
            weights=doc["weights"],
            means=doc["means"],
            variances=doc["variances"],
            objective=objective,
        )
    if task is Task.PCA:
        return LowRankPsd(factor=doc["factor"], objective=objective)
    return RegressionModel(theta=doc["theta"], objective=objective)
