"""Sketch-matching cost ‖z̃ − A(p_θ)‖² for every task model."""

from typing import Optional, Union

import numpy as np

from sketch_learning.core.errors import IncompatibleSketchError, InvalidArgumentError
from sketch_learning.core.models import CentroidModel, GmmModel, LowRankPsd, MapKind
from sketch_learning.features.atoms import QUANTIZED_KERNEL_CONSTANT, decoding_phase, dirac_from_frequencies
from sketch_learning.features.feature_map import FeatureMapSpec
from sketch_learning.sketching.sketch import Sketch
from sketch_learning.solvers.families import DiracFamily, GaussianFamily

TaskModel = Union[CentroidModel, GmmModel, LowRankPsd]


def decoding_target(sketch: Sketch) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """
    What mixture atoms are matched against, plus the phase applied to them.

    Complex sketches are matched directly. A quantized sketch is rescaled by
    the quantized kernel constant and matched against dithered complex atoms.
    """
    kind = sketch.spec.kind
    if kind is MapKind.RFF_COMPLEX:
        return sketch.values, None
    if kind is MapKind.RFF_QUANTIZED:
        return sketch.values / QUANTIZED_KERNEL_CONSTANT, decoding_phase(sketch.spec)
    raise IncompatibleSketchError(f"mixture fitting needs a random Fourier sketch, got {kind.value}")


def selection_criterion(sketch: Sketch, points: np.ndarray) -> np.ndarray:
    """
    Re⟨A(δ_c), z̃⟩/m at each row c of ``points``.

    This is the surface the greedy step climbs when the support is empty. It
    tracks a Parzen estimate of the data with kernel width ``kernel_width(sigma_w)``.
    """
    target, phase = decoding_target(sketch)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != sketch.spec.d:
        raise InvalidArgumentError(f"points must have {sketch.spec.d} coordinates, got {points.shape[1]}")
    atoms = dirac_from_frequencies(sketch.spec.frequencies, points.T)
    if phase is not None:
        atoms = atoms * phase[:, None]
    return (atoms.conj().T @ target).real / sketch.m


def mixture_atoms(model: Union[CentroidModel, GmmModel], spec: FeatureMapSpec, phase=None) -> np.ndarray:
    """(m, k) matrix whose columns are the model's component atoms."""
    w = spec.frequencies
    if isinstance(model, CentroidModel):
        family = DiracFamily(w, model.centroids.min(axis=0), model.centroids.max(axis=0), phase)
        return np.column_stack([family.atom(c) for c in model.centroids])
    family = GaussianFamily(w, model.means.min(axis=0), model.means.max(axis=0), phase)
    return np.column_stack(
        [family.atom(np.concatenate([mu, np.log(var)])) for mu, var in zip(model.means, model.variances, strict=True)]
    )


def lowrank_features(factor: np.ndarray, frequencies: np.ndarray) -> np.ndarray:
    """f(U)_j = ‖Uᵀ w_j‖², the quadratic sketch of R = UUᵀ."""
    projected = frequencies @ factor
    return np.einsum("jk,jk->j", projected, projected)


def sketch_cost(model: TaskModel, sketch: Sketch, spec: Optional[FeatureMapSpec] = None) -> float:
    """
    ‖z̃ − Σ_ℓ α_ℓ atom_ℓ‖² (mixtures) or ‖z̃ − f(U)‖² (low-rank PSD).

    ``spec`` defaults to the sketch's own map; when given it must carry the
    same fingerprint.
    """
    spec = spec or sketch.spec
    if spec.digest != sketch.spec.digest:
        raise IncompatibleSketchError(
            f"fingerprint mismatch: map {spec.fingerprint[:12]} vs sketch {sketch.fingerprint[:12]}"
        )
    if isinstance(model, LowRankPsd):
        if spec.kind is not MapKind.QUADRATIC:
            raise IncompatibleSketchError(f"low-rank models need a quadratic sketch, got {spec.kind.value}")
        residual = sketch.values - lowrank_features(model.factor, spec.frequencies)
        return float(residual @ residual)
    if isinstance(model, (CentroidModel, GmmModel)):
        if model.d != spec.d:
            raise InvalidArgumentError(f"model dimension {model.d} != map dimension {spec.d}")
        target, phase = decoding_target(sketch)
        residual = target - mixture_atoms(model, spec, phase) @ model.weights
        return float(np.vdot(residual, residual).real)
    raise InvalidArgumentError(f"no sketch cost for {type(model).__name__}")
