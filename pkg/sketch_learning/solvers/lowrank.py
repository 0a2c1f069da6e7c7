"""
Compressive PCA: fit R = UUᵀ to a quadratic sketch.

The factorized objective ‖z̃ − f(U)‖² with f(U)_j = ‖Uᵀw_j‖² keeps R
symmetric PSD of rank at most k without an explicit projection. Its gradient
is −4 Wᵀ diag(z̃ − f(U)) W U.
"""

from typing import Optional

import numpy as np

from sketch_learning._logging import SketchLearningLogger
from sketch_learning.core.errors import IncompatibleSketchError, InvalidArgumentError
from sketch_learning.core.models import LowRankPsd, MapKind, SolverOptions
from sketch_learning.core.random import stream
from sketch_learning.features.feature_map import FeatureMapSpec
from sketch_learning.sketching.sketch import Sketch
from sketch_learning.solvers.descent import armijo_descent

logger = SketchLearningLogger.get(__name__)


def lowrank_objective(factor: np.ndarray, frequencies: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Objective and gradient w.r.t. U (same shape as U)."""
    projected = frequencies @ factor
    residual = target - np.einsum("jk,jk->j", projected, projected)
    grad = -4.0 * frequencies.T @ (residual[:, None] * projected)
    return float(residual @ residual), grad


def fit_lowrank_psd(
    sketch: Sketch,
    k: int,
    spec: Optional[FeatureMapSpec] = None,
    opts: Optional[SolverOptions] = None,
) -> LowRankPsd:
    """Best of ``opts.restarts`` seeded descents; never worse than U = 0."""
    spec = spec or sketch.spec
    opts = opts or SolverOptions()
    if spec.digest != sketch.spec.digest:
        raise IncompatibleSketchError("map fingerprint doesn't match the sketch")
    if spec.kind is not MapKind.QUADRATIC:
        raise IncompatibleSketchError(f"low-rank fitting needs a quadratic sketch, got {spec.kind.value}")
    d = spec.d
    if not 1 <= k <= d:
        raise InvalidArgumentError(f"rank k must be in [1, {d}], got {k}")

    w = spec.frequencies
    z = np.asarray(sketch.values, dtype=float)
    # E[(wᵀx)²] = wᵀRw, so mean(z) ≈ tr(R)·mean‖w‖²/d for isotropic frequencies
    trace_estimate = max(float(z.mean()) * d / float(np.mean(np.sum(w * w, axis=1))), 0.0)
    scale = np.sqrt(trace_estimate / (d * k))

    def fun_grad(x: np.ndarray) -> tuple[float, np.ndarray]:
        f, g = lowrank_objective(x.reshape(d, k), w, z)
        return f, g.ravel()

    best_factor = np.zeros((d, k))
    best_objective = float(z @ z)
    rng = stream(opts.seed, "solver")
    with SketchLearningLogger.timed(logger, "lowrank.done", k=k, d=d, m=spec.m) as log:
        for restart in range(opts.restarts):
            start = rng.standard_normal((d, k)) * scale
            if not np.any(start):
                continue
            result = armijo_descent(
                fun_grad,
                start.ravel(),
                tolerance=opts.tolerance,
                max_iterations=opts.max_lowrank_iterations,
                label="lowrank.descent",
            )
            logger.debug("lowrank.restart: index=%d objective=%.6g", restart, result.objective)
            if result.objective < best_objective:
                best_factor, best_objective = result.x.reshape(d, k), result.objective
        log["objective"] = best_objective
    return LowRankPsd(factor=best_factor, objective=best_objective)


def recovered_subspace(model: LowRankPsd) -> np.ndarray:
    """Orthonormal basis of the column space of U."""
    return model.subspace()

