"""
Greedy sketch fitting (CLOMP with replacement).

The solver builds a k-component mixture whose sketch matches z̃:

1. find the atom most correlated with the residual (multi-start bounded
   L-BFGS over the atom parameters),
2. add it to the support,
3. once the support exceeds k, drop the component with the smallest weight
   in a nonnegative fit over normalized atoms,
4. refit nonnegative weights,
5. jointly refine all parameters and weights by monotone projected descent.

The loop runs 2k times; the second k iterations replace weak early picks.
The best weight-normalized model seen from iteration k on is returned.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from sketch_learning._logging import SketchLearningLogger
from sketch_learning.core.errors import IncompatibleSketchError, InvalidArgumentError
from sketch_learning.core.interfaces import IAtomFamily
from sketch_learning.core.models import CentroidModel, GmmModel, SolverOptions
from sketch_learning.core.random import stream
from sketch_learning.features.feature_map import FeatureMapSpec
from sketch_learning.sketching.sketch import Sketch
from sketch_learning.solvers.cost import decoding_target
from sketch_learning.solvers.descent import armijo_descent
from sketch_learning.solvers.families import DiracFamily, GaussianFamily
from sketch_learning.solvers.nnls import nnls

logger = SketchLearningLogger.get(__name__)

_MIN_ATOM_NORM = 1e-15


@dataclass
class Mixture:
    """Current support: one parameter row and one weight per component."""

    theta: np.ndarray
    alpha: np.ndarray
    atoms: np.ndarray

    @property
    def size(self) -> int:
        return int(self.alpha.shape[0])


class Clomp:
    """CLOMP-R over one atom family and one target vector."""

    def __init__(self, family: IAtomFamily, target: np.ndarray, k: int, opts: SolverOptions):
        self.family = family
        self.target = np.asarray(target, dtype=np.complex128)
        self.k = k
        self.opts = opts
        self._rng = stream(opts.seed, "solver")
        self._lower, self._upper = family.bounds()

    # -------------------------------------------------------------- helpers

    def _atoms(self, theta: np.ndarray) -> np.ndarray:
        if theta.shape[0] == 0:
            return np.empty((self.target.shape[0], 0), dtype=np.complex128)
        return np.column_stack([self.family.atom(t) for t in theta])

    def cost(self, atoms: np.ndarray, alpha: np.ndarray) -> float:
        r = self.target - atoms @ alpha
        return float(np.vdot(r, r).real)

    # ------------------------------------------------------ step 1: search

    def _correlation(self, theta: np.ndarray, residual: np.ndarray) -> tuple[float, np.ndarray]:
        """−Re⟨A(θ), r⟩/‖A(θ)‖ and its gradient."""
        a = self.family.atom(theta)
        jac = self.family.jacobian(theta)
        norm = max(float(np.linalg.norm(a)), _MIN_ATOM_NORM)
        corr = float(np.vdot(a, residual).real)
        grad = -(jac.conj().T @ residual).real / norm + corr * (jac.conj().T @ a).real / norm**3
        return -corr / norm, grad

    def search_atom(self, residual: np.ndarray) -> np.ndarray:
        bounds = list(zip(self._lower, self._upper, strict=True))
        best_theta, best_value = None, np.inf
        for _ in range(self.opts.restarts):
            start = self.family.random_init(self._rng)
            result = minimize(
                self._correlation,
                x0=start,
                args=(residual,),
                jac=True,
                method="L-BFGS-B",
                bounds=bounds,
                options={"maxiter": self.opts.max_search_iterations},
            )
            theta = np.clip(result.x, self._lower, self._upper)
            value, _ = self._correlation(theta, residual)
            # strict comparison keeps the earliest restart on ties
            if value < best_value:
                best_theta, best_value = theta, value
        assert best_theta is not None
        return best_theta

    # ------------------------------------------------------ step 5: refine

    def refine(self, mix: Mixture) -> Mixture:
        t, p = mix.size, self.family.n_params

        def fun_grad(x: np.ndarray) -> tuple[float, np.ndarray]:
            theta = x[: t * p].reshape(t, p)
            alpha = x[t * p :]
            atoms = self._atoms(theta)
            r = self.target - atoms @ alpha
            grad_theta = np.vstack(
                [-2.0 * alpha[i] * (self.family.jacobian(theta[i]).conj().T @ r).real for i in range(t)]
            )
            grad_alpha = -2.0 * (atoms.conj().T @ r).real
            return float(np.vdot(r, r).real), np.concatenate([grad_theta.ravel(), grad_alpha])

        lower = np.concatenate([np.tile(self._lower, t), np.zeros(t)])
        upper = np.concatenate([np.tile(self._upper, t), np.full(t, np.inf)])
        result = armijo_descent(
            fun_grad,
            np.concatenate([mix.theta.ravel(), mix.alpha]),
            lower,
            upper,
            tolerance=self.opts.tolerance,
            max_iterations=self.opts.max_refine_iterations,
            label="clomp.refine",
        )
        theta = result.x[: t * p].reshape(t, p)
        return Mixture(theta=theta, alpha=result.x[t * p :], atoms=self._atoms(theta))

    # ---------------------------------------------------------------- loop

    def fit(self) -> tuple[np.ndarray, np.ndarray, float]:
        """Run 2k iterations; return (theta, normalized weights, cost of the normalized model)."""
        p = self.family.n_params
        mix = Mixture(theta=np.empty((0, p)), alpha=np.empty(0), atoms=self._atoms(np.empty((0, p))))
        residual = self.target.copy()
        best: Optional[tuple[np.ndarray, np.ndarray, float]] = None

        for iteration in range(1, 2 * self.k + 1):
            new_theta = self.search_atom(residual)
            theta = np.vstack([mix.theta, new_theta[None, :]])
            atoms = np.column_stack([mix.atoms, self.family.atom(new_theta)])

            if theta.shape[0] > self.k:
                norms = np.maximum(np.linalg.norm(atoms, axis=0), _MIN_ATOM_NORM)
                beta = nnls(atoms / norms, self.target)
                drop = int(np.argmin(beta))
                theta = np.delete(theta, drop, axis=0)
                atoms = np.delete(atoms, drop, axis=1)

            alpha = nnls(atoms, self.target)
            mix = self.refine(Mixture(theta=theta, alpha=alpha, atoms=atoms))
            residual = self.target - mix.atoms @ mix.alpha

            if iteration >= self.k:
                total = mix.alpha.sum()
                weights = mix.alpha / total if total > 0 else np.full(mix.size, 1.0 / mix.size)
                normalized_cost = self.cost(mix.atoms, weights)
                if best is None or normalized_cost < best[2]:
                    best = (mix.theta.copy(), weights, normalized_cost)
                logger.debug("clomp.iteration: t=%d cost=%.6g", iteration, normalized_cost)

        assert best is not None
        return best


# ------------------------------------------------------------------ entry points


def _prepare(sketch: Sketch, k: int, spec: Optional[FeatureMapSpec], opts: Optional[SolverOptions]):
    spec = spec or sketch.spec
    if spec.digest != sketch.spec.digest:
        raise IncompatibleSketchError("map fingerprint doesn't match the sketch")
    opts = opts or SolverOptions()
    if k < 1:
        raise InvalidArgumentError(f"k must be >= 1, got {k}")
    if k > spec.m:
        raise InvalidArgumentError(f"k={k} exceeds the sketch size m={spec.m}; the fit is underdetermined")
    if sketch.n == 0:
        raise InvalidArgumentError("can't learn from an empty sketch")
    target, phase = decoding_target(sketch)
    lower, upper = _search_box(sketch, opts)
    return spec, opts, target, phase, lower, upper


def _search_box(sketch: Sketch, opts: SolverOptions) -> tuple[np.ndarray, np.ndarray]:
    if opts.lower is not None and opts.upper is not None:
        lower, upper = np.asarray(opts.lower, dtype=float), np.asarray(opts.upper, dtype=float)
    elif sketch.box is not None:
        lower, upper = sketch.box
    else:
        raise InvalidArgumentError("no search box: pass lower/upper bounds or sketch with a reservoir")
    if lower.shape != (sketch.spec.d,) or upper.shape != (sketch.spec.d,):
        raise InvalidArgumentError(f"search box must have {sketch.spec.d} coordinates per side")
    return lower, upper


def clomp_kmeans(
    sketch: Sketch,
    k: int,
    spec: Optional[FeatureMapSpec] = None,
    opts: Optional[SolverOptions] = None,
) -> CentroidModel:
    """Fit k weighted centroids to a random Fourier sketch."""
    with SketchLearningLogger.timed(logger, "clomp.kmeans", k=k) as log:
        spec, opts, target, phase, lower, upper = _prepare(sketch, k, spec, opts)
        family = DiracFamily(spec.frequencies, lower, upper, phase)
        theta, weights, cost = Clomp(family, target, k, opts).fit()
        log.update(m=spec.m, cost=float(cost))
    return CentroidModel(centroids=theta, weights=weights, objective=cost).canonical()


def clomp_gmm(
    sketch: Sketch,
    k: int,
    spec: Optional[FeatureMapSpec] = None,
    opts: Optional[SolverOptions] = None,
) -> GmmModel:
    """Fit a k-component diagonal Gaussian mixture to a random Fourier sketch."""
    with SketchLearningLogger.timed(logger, "clomp.gmm", k=k) as log:
        spec, opts, target, phase, lower, upper = _prepare(sketch, k, spec, opts)
        family = GaussianFamily(spec.frequencies, lower, upper, phase, opts.variance_floor)
        theta, weights, cost = Clomp(family, target, k, opts).fit()
        log.update(m=spec.m, cost=float(cost))
    means, variances = theta[:, : spec.d], np.exp(theta[:, spec.d :])
    return GmmModel(weights=weights, means=means, variances=variances, objective=cost).canonical()
