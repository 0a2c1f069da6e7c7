"""
Nonlinear feature maps Φ(·).

- ``rff_complex``: exp(−j2π Wx), unit modulus per coordinate.
- ``rff_quantized``: sign(cos(2π(Wx + ξ))) with one dither ξ shared by every sample.
- ``quadratic``: (Wx)², the per-frequency energy.
- ``outer_product``: vec(x xᵀ), column-major, no operator.

A :class:`FeatureMapSpec` is built from frozen :class:`MapParams`; its
fingerprint is a SHA-256 over the canonical JSON of those parameters, so two
specs agree exactly when every defining parameter does.
"""

import hashlib
import json
from functools import cached_property, lru_cache
from typing import Optional

import numpy as np

from sketch_learning.core.errors import InvalidArgumentError
from sketch_learning.core.models import MapKind, MapParams, OperatorKind
from sketch_learning.core.random import stream
from sketch_learning.transform.operator import (
    FrequencyOperator,
    build_dense,
    build_operator,
    build_structured,
)

TWO_PI = 2.0 * np.pi


def fingerprint_digest(params: MapParams) -> bytes:
    """32-byte SHA-256 over the canonical JSON form of the map parameters."""
    canonical = json.dumps(params.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).digest()


class FeatureMapSpec:
    """A fully specified feature map: parameters, regenerated operator, dither."""

    def __init__(self, params: MapParams, operator: Optional[FrequencyOperator] = None):
        if operator is None and params.operator is not None:
            operator = build_operator(params.operator)
        if operator is not None and operator.params != params.operator:
            raise InvalidArgumentError("operator does not match the map parameters")
        self.params = params
        self.operator = operator
        self.dither: Optional[np.ndarray] = None
        if params.kind is MapKind.RFF_QUANTIZED:
            assert params.dither_seed is not None
            dither = stream(params.dither_seed, "dither").random(params.m)
            dither.setflags(write=False)
            self.dither = dither

    # ---------------------------------------------------------- construction

    @classmethod
    def create(
        cls,
        kind: MapKind | str,
        d: int,
        m: Optional[int] = None,
        sigma_w: float = 1.0,
        seed: int = 0,
        operator_kind: OperatorKind | str = OperatorKind.DENSE,
        dither_seed: Optional[int] = None,
    ) -> "FeatureMapSpec":
        """Build a map from loose arguments; the one-stop constructor used by the CLI and tests."""
        kind = MapKind(kind)
        if kind is MapKind.OUTER_PRODUCT:
            return cls(MapParams(kind=kind, d=int(d)))
        if m is None:
            raise InvalidArgumentError(f"{kind.value} maps need a sketch size m")
        builder = build_structured if OperatorKind(operator_kind) is OperatorKind.STRUCTURED else build_dense
        operator = builder(m, d, sigma_w, seed)
        if kind is MapKind.RFF_QUANTIZED and dither_seed is None:
            dither_seed = seed
        params = MapParams(kind=kind, d=int(d), operator=operator.params, dither_seed=dither_seed)
        return cls(params, operator=operator)

    @classmethod
    def with_operator(
        cls,
        kind: MapKind | str,
        operator: FrequencyOperator,
        dither_seed: Optional[int] = None,
    ) -> "FeatureMapSpec":
        """Wrap an already-built (possibly explicit) operator."""
        kind = MapKind(kind)
        params = MapParams(kind=kind, d=operator.d, operator=operator.params, dither_seed=dither_seed)
        return cls(params, operator=operator)

    # ------------------------------------------------------------ properties

    @property
    def kind(self) -> MapKind:
        return self.params.kind

    @property
    def d(self) -> int:
        return self.params.d

    @property
    def m(self) -> int:
        return self.params.m

    @property
    def is_complex(self) -> bool:
        return self.params.is_complex

    @property
    def sigma_w(self) -> float:
        return self.operator.sigma_w if self.operator is not None else 0.0

    @cached_property
    def digest(self) -> bytes:
        return fingerprint_digest(self.params)

    @property
    def fingerprint(self) -> str:
        return self.digest.hex()

    @property
    def frequencies(self) -> np.ndarray:
        """Materialized W (m, d)."""
        if self.operator is None:
            raise InvalidArgumentError("outer_product maps have no frequencies")
        return self.operator.matrix

    @property
    def dtype(self) -> type:
        return np.complex128 if self.is_complex else np.float64

    def __repr__(self) -> str:
        return f"FeatureMapSpec(kind={self.kind.value}, d={self.d}, m={self.m}, fp={self.fingerprint[:12]})"

    # ------------------------------------------------------------ evaluation

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Features of a block of rows, shape (n, d) -> (n, m)."""
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.d:
            raise InvalidArgumentError(f"expected rows of length {self.d}, got block of shape {x.shape}")
        if self.kind is MapKind.OUTER_PRODUCT:
            return (x[:, :, None] * x[:, None, :]).reshape(x.shape[0], self.d * self.d)
        assert self.operator is not None
        u = self.operator.apply_batch(x)
        if self.kind is MapKind.RFF_COMPLEX:
            return np.exp(-1j * TWO_PI * u)
        if self.kind is MapKind.RFF_QUANTIZED:
            return _square_wave(u + self.dither)
        return u * u


@lru_cache(maxsize=32)
def feature_map_for(params: MapParams) -> FeatureMapSpec:
    """Cached regeneration of a map from parameters (sketch files only carry parameters)."""
    return FeatureMapSpec(params)


def _square_wave(t: np.ndarray) -> np.ndarray:
    # sign(cos(2πt)) with sign(0) := +1
    return np.where(np.cos(TWO_PI * t) >= 0.0, 1.0, -1.0)


def _single(spec: FeatureMapSpec, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.d,):
        raise InvalidArgumentError(f"expected a vector of length {spec.d}, got shape {x.shape}")
    return x


def _require(spec: FeatureMapSpec, *kinds: MapKind) -> None:
    if spec.kind not in kinds:
        allowed = ", ".join(k.value for k in kinds)
        raise InvalidArgumentError(f"operation needs a map of kind {allowed}, got {spec.kind.value}")


def rff(spec: FeatureMapSpec, x: np.ndarray) -> np.ndarray:
    """Complex random Fourier features exp(−j2π w_jᵀx)."""
    _require(spec, MapKind.RFF_COMPLEX)
    return spec.evaluate(_single(spec, x)[None, :])[0]


def rff_quantized(spec: FeatureMapSpec, x: np.ndarray) -> np.ndarray:
    """Dithered one-bit features sign(cos(2π(w_jᵀx + ξ_j))) in {−1, +1}."""
    _require(spec, MapKind.RFF_QUANTIZED)
    return spec.evaluate(_single(spec, x)[None, :])[0]


def rff_dithered(spec: FeatureMapSpec, x: np.ndarray) -> np.ndarray:
    """exp(−j2π(w_jᵀx + ξ_j)): the complex map a quantized sketch is decoded against."""
    _require(spec, MapKind.RFF_QUANTIZED)
    assert spec.operator is not None and spec.dither is not None
    u = spec.operator.apply(_single(spec, x))
    return np.exp(-1j * TWO_PI * (u + spec.dither))


def quadratic(spec: FeatureMapSpec, x: np.ndarray) -> np.ndarray:
    """Squared projections (w_jᵀx)²."""
    _require(spec, MapKind.QUADRATIC)
    return spec.evaluate(_single(spec, x)[None, :])[0]


def outer_product(x: np.ndarray) -> np.ndarray:
    """Column-major vec(x xᵀ)."""
    x = np.asarray(x, dtype=float).ravel()
    return np.outer(x, x).reshape(-1, order="F")
