"""
Projected gradient descent with Barzilai–Borwein steps and Armijo backtracking.

Every accepted step satisfies the sufficient-decrease condition, so the
objective trace is non-increasing; a step that would increase it (possible
only through non-finite arithmetic) raises :class:`NumericalError`.
"""

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from sketch_learning._logging import SketchLearningLogger
from sketch_learning.core.errors import NumericalError

logger = SketchLearningLogger.get(__name__)

FunGrad = Callable[[np.ndarray], tuple[float, np.ndarray]]

_ARMIJO_C1 = 1e-4
_MAX_BACKTRACKS = 60
_MIN_STEP = 1e-20
_MAX_STEP = 1e20


@dataclass
class DescentResult:
    x: np.ndarray
    objective: float
    iterations: int
    converged: bool
    trace: list[float] = field(default_factory=list)


def armijo_descent(
    fun_grad: FunGrad,
    x0: np.ndarray,
    lower: np.ndarray | None = None,
    upper: np.ndarray | None = None,
    tolerance: float = 1e-8,
    max_iterations: int = 300,
    label: str = "descent",
) -> DescentResult:
    """
    Minimize ``fun_grad`` over the box [lower, upper] starting from ``x0``.

    Stops when the relative objective decrease of an accepted step falls
    below ``tolerance``, when no step along the projected gradient decreases
    the objective, or after ``max_iterations`` steps.
    """
    lo = np.full(x0.shape, -np.inf) if lower is None else np.asarray(lower, dtype=float)
    hi = np.full(x0.shape, np.inf) if upper is None else np.asarray(upper, dtype=float)
    x = np.clip(np.asarray(x0, dtype=float), lo, hi)
    f, g = fun_grad(x)
    _check_finite(f, g, label)
    trace = [f]

    gnorm = float(np.linalg.norm(g))
    step = 1.0 / gnorm if gnorm > 0 else 1.0
    x_prev = g_prev = None
    converged = False
    iterations = 0

    for iterations in range(1, max_iterations + 1):
        if x_prev is not None:
            s, y = x - x_prev, g - g_prev
            sy = float(s @ y)
            if sy > 0:
                step = float(np.clip((s @ s) / sy, _MIN_STEP, _MAX_STEP))

        accepted = False
        for _ in range(_MAX_BACKTRACKS):
            x_new = np.clip(x - step * g, lo, hi)
            move = x_new - x
            if not np.any(move):
                break
            f_new, g_new = fun_grad(x_new)
            if np.isfinite(f_new) and f_new <= f + _ARMIJO_C1 * float(g @ move):
                accepted = True
                break
            step *= 0.5
            if step < _MIN_STEP:
                break

        if not accepted:
            converged = True
            break
        _check_finite(f_new, g_new, label)
        if f_new > f:
            raise NumericalError(f"{label}: objective increased from {f!r} to {f_new!r}")

        decrease = f - f_new
        x_prev, g_prev = x, g
        x, f, g = x_new, f_new, g_new
        trace.append(f)
        if decrease <= tolerance * max(abs(trace[-2]), np.finfo(float).tiny) or f == 0.0:
            converged = True
            break

    logger.debug(
        "%s.done: iterations=%d objective=%.6g converged=%s", label, iterations, f, converged
    )
    return DescentResult(x=x, objective=float(f), iterations=iterations, converged=converged, trace=trace)


def _check_finite(f: float, g: np.ndarray, label: str) -> None:
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise NumericalError(f"{label}: non-finite objective or gradient")
