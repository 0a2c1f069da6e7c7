"""
Atom families fitted by the greedy solver.

Each family packs the parameters of one mixture component into a flat real
vector and evaluates the component's noiseless sketch at a frequency matrix
W. An optional per-frequency ``phase`` (the dither phase exp(−j2πξ) of a
quantized map) multiplies every atom so that the same code decodes both
complex and quantized sketches.
"""

from typing import Optional

import numpy as np

from sketch_learning.core.errors import InvalidArgumentError
from sketch_learning.features.atoms import (
    dirac_from_frequencies,
    dirac_jacobian_from_frequencies,
    gaussian_from_frequencies,
    gaussian_jacobian_from_frequencies,
)


class _BoxFamily:
    def __init__(
        self,
        frequencies: np.ndarray,
        lower: np.ndarray,
        upper: np.ndarray,
        phase: Optional[np.ndarray] = None,
    ):
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        d = frequencies.shape[1]
        if lower.shape != (d,) or upper.shape != (d,):
            raise InvalidArgumentError(f"search box must have {d} coordinates per side")
        if np.any(lower > upper):
            raise InvalidArgumentError("search box lower bound exceeds upper bound")
        self.w = frequencies
        self.d = d
        self.m = frequencies.shape[0]
        self.lower = lower
        self.upper = upper
        self.phase = phase

    def _phased(self, a: np.ndarray) -> np.ndarray:
        if self.phase is None:
            return a
        return a * (self.phase if a.ndim == 1 else self.phase[:, None])


class DiracFamily(_BoxFamily):
    """Point masses δ_c with c inside the search box."""

    @property
    def n_params(self) -> int:
        return self.d

    def atom(self, theta: np.ndarray) -> np.ndarray:
        return self._phased(dirac_from_frequencies(self.w, theta))

    def jacobian(self, theta: np.ndarray) -> np.ndarray:
        return self._phased(dirac_jacobian_from_frequencies(self.w, theta))

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.lower, self.upper

    def random_init(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.lower, self.upper)

    def centroid(self, theta: np.ndarray) -> np.ndarray:
        return np.asarray(theta, dtype=float)


class GaussianFamily(_BoxFamily):
    """
    Diagonal Gaussians parameterized as θ = (μ, log σ²).

    Means stay in the search box; log-variances stay between the variance
    floor and a quarter of the squared box width per coordinate.
    """

    def __init__(
        self,
        frequencies: np.ndarray,
        lower: np.ndarray,
        upper: np.ndarray,
        phase: Optional[np.ndarray] = None,
        variance_floor: float = 1e-8,
    ):
        super().__init__(frequencies, lower, upper, phase)
        self.variance_floor = float(variance_floor)
        width = self.upper - self.lower
        self.log_var_lower = np.full(self.d, np.log(self.variance_floor))
        self.log_var_upper = np.log(np.maximum((0.5 * width) ** 2, self.variance_floor))
        self._width = width

    @property
    def n_params(self) -> int:
        return 2 * self.d

    def split(self, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return theta[: self.d], np.exp(theta[self.d :])

    def atom(self, theta: np.ndarray) -> np.ndarray:
        mu, sigma2 = self.split(theta)
        return self._phased(gaussian_from_frequencies(self.w, mu, sigma2))

    def jacobian(self, theta: np.ndarray) -> np.ndarray:
        mu, sigma2 = self.split(theta)
        d_mu, d_sigma2 = gaussian_jacobian_from_frequencies(self.w, mu, sigma2)
        # chain rule through σ² = exp(s)
        return self._phased(np.hstack([d_mu, d_sigma2 * sigma2]))

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.concatenate([self.lower, self.log_var_lower]),
            np.concatenate([self.upper, self.log_var_upper]),
        )

    def random_init(self, rng: np.random.Generator) -> np.ndarray:
        mu = rng.uniform(self.lower, self.upper)
        sigma = 10.0 ** rng.uniform(-0.8, -0.1, self.d) * self._width
        log_var = np.log(np.maximum(sigma**2, self.variance_floor))
        return np.concatenate([mu, np.clip(log_var, self.log_var_lower, self.log_var_upper)])
