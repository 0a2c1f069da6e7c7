"""Closed-form least squares from an outer-product sketch."""

import numpy as np
import scipy.linalg

from sketch_learning._logging import SketchLearningLogger
from sketch_learning.core.errors import IncompatibleSketchError, InvalidArgumentError, NumericalError
from sketch_learning.core.models import MapKind, RegressionModel
from sketch_learning.sketching.sketch import Sketch

logger = SketchLearningLogger.get(__name__)

DEFAULT_MAX_CONDITION = 1e12


def autocorrelation(sketch: Sketch) -> np.ndarray:
    """R̂ = (1/n) Σ x xᵀ, symmetrized (a privatized sketch may not be exactly symmetric)."""
    if sketch.spec.kind is not MapKind.OUTER_PRODUCT:
        raise IncompatibleSketchError(f"expected an outer_product sketch, got {sketch.spec.kind.value}")
    d = sketch.spec.d
    r = np.asarray(sketch.values, dtype=float).reshape(d, d, order="F")
    return 0.5 * (r + r.T)


def ls_regression(
    sketch: Sketch,
    d1: int,
    d2: int,
    ridge: float = 0.0,
    max_condition: float = DEFAULT_MAX_CONDITION,
) -> RegressionModel:
    """
    θ̂ solving θ̂ R̂₂₂ = R̂₁₂, where x = (x₁, x₂) with x₁ the first d1 coordinates.

    ``ridge`` adds λI to R̂₂₂. The objective is the sketched empirical risk
    (1/n) Σ ‖x₁ − θ̂x₂‖².
    """
    r = autocorrelation(sketch)
    d = sketch.spec.d
    if d1 < 1 or d2 < 1 or d1 + d2 != d:
        raise InvalidArgumentError(f"need d1, d2 >= 1 with d1 + d2 = {d}, got {d1} + {d2}")
    if ridge < 0:
        raise InvalidArgumentError(f"ridge must be nonnegative, got {ridge}")
    if sketch.n == 0:
        raise InvalidArgumentError("can't regress on an empty sketch")

    r11, r12, r22 = r[:d1, :d1], r[:d1, d1:], r[d1:, d1:]
    system = r22 + ridge * np.eye(d2)
    condition = float(np.linalg.cond(system))
    if not np.isfinite(condition) or condition > max_condition:
        raise NumericalError(
            f"R22 is ill-conditioned (cond={condition:.3g} > {max_condition:.3g}); retry with a ridge penalty"
        )
    theta = scipy.linalg.solve(system, r12.T, assume_a="sym").T
    risk = float(np.trace(r11) - 2.0 * np.trace(theta @ r12.T) + np.trace(theta @ r22 @ theta.T))
    logger.info("regress.done: d1=%d d2=%d cond=%.3g ridge=%g", d1, d2, condition, ridge)
    return RegressionModel(theta=theta, objective=risk)
