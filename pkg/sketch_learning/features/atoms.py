"""
Closed-form sketches of parametric distributions and their derivatives.

For random Fourier features the sketch of a distribution samples its
characteristic function at the frequencies 2π w_j, so Diracs and diagonal
Gaussians have analytic atoms:

    Dirac(c):          A_j = exp(−j2π w_jᵀc)
    N(μ, diag(σ²)):    A_j = exp(−j2π w_jᵀμ) · exp(−2π² Σ_t w_jt² σ²_t)

The ``*_from_frequencies`` helpers work on a bare frequency matrix so the
solvers can reuse them for quantized maps (where atoms carry the dither phase).
"""

import numpy as np

from sketch_learning.core.errors import InvalidArgumentError
from sketch_learning.core.models import MapKind
from sketch_learning.features.feature_map import TWO_PI, FeatureMapSpec, _require, _single

# E_ξ⟨sign(cos 2π(u+ξ)), exp(−j2π(u'+ξ))⟩ = QUANTIZED_KERNEL_CONSTANT · exp(−j2π(u−u'))
QUANTIZED_KERNEL_CONSTANT = 2.0 / np.pi


def quantized_kernel_constant() -> float:
    """First-harmonic gain of the dithered square wave against its complex exponential."""
    return QUANTIZED_KERNEL_CONSTANT


def decoding_phase(spec: FeatureMapSpec) -> np.ndarray:
    """exp(−j2πξ): multiplies complex atoms so they line up with a quantized sketch."""
    _require(spec, MapKind.RFF_QUANTIZED)
    assert spec.dither is not None
    return np.exp(-1j * TWO_PI * spec.dither)


# ------------------------------------------------------------- frequency-level


def dirac_from_frequencies(w: np.ndarray, c: np.ndarray) -> np.ndarray:
    return np.exp(-1j * TWO_PI * (w @ c))


def dirac_jacobian_from_frequencies(w: np.ndarray, c: np.ndarray) -> np.ndarray:
    """∂A_j/∂c = −j2π w_j A_j, shape (m, d)."""
    return (-1j * TWO_PI) * w * dirac_from_frequencies(w, c)[:, None]


def gaussian_from_frequencies(w: np.ndarray, mu: np.ndarray, sigma2: np.ndarray) -> np.ndarray:
    return np.exp(-1j * TWO_PI * (w @ mu) - 2.0 * np.pi**2 * ((w * w) @ sigma2))


def gaussian_jacobian_from_frequencies(
    w: np.ndarray, mu: np.ndarray, sigma2: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """(∂A/∂μ, ∂A/∂σ²), each of shape (m, d)."""
    a = gaussian_from_frequencies(w, mu, sigma2)[:, None]
    return (-1j * TWO_PI) * w * a, (-2.0 * np.pi**2) * (w * w) * a


# ------------------------------------------------------------------ spec-level


def dirac_atom(spec: FeatureMapSpec, c: np.ndarray) -> np.ndarray:
    """Φ(c), the noiseless sketch of a point mass at c."""
    _require(spec, MapKind.RFF_COMPLEX, MapKind.QUADRATIC)
    return spec.evaluate(_single(spec, c)[None, :])[0]


def gaussian_atom(spec: FeatureMapSpec, mu: np.ndarray, sigma2: np.ndarray) -> np.ndarray:
    """Characteristic function of N(μ, diag(σ²)) at the map's frequencies."""
    _require(spec, MapKind.RFF_COMPLEX)
    mu = _single(spec, mu)
    sigma2 = _single(spec, sigma2)
    if np.any(sigma2 < 0):
        raise InvalidArgumentError("variances must be nonnegative")
    return gaussian_from_frequencies(spec.frequencies, mu, sigma2)


def atom_gradient(spec: FeatureMapSpec, *params: np.ndarray):
    """
    Jacobian of an atom w.r.t. its parameters.

    ``atom_gradient(spec, c)`` returns ∂Φ/∂c with shape (m, d);
    ``atom_gradient(spec, mu, sigma2)`` returns the pair (∂A/∂μ, ∂A/∂σ²).
    """
    _require(spec, MapKind.RFF_COMPLEX)
    w = spec.frequencies
    if len(params) == 1:
        return dirac_jacobian_from_frequencies(w, _single(spec, params[0]))
    if len(params) == 2:
        mu, sigma2 = _single(spec, params[0]), _single(spec, params[1])
        if np.any(sigma2 < 0):
            raise InvalidArgumentError("variances must be nonnegative")
        return gaussian_jacobian_from_frequencies(w, mu, sigma2)
    raise InvalidArgumentError("atom_gradient takes (c) or (mu, sigma2)")


def expected_kernel(sigma_w: float, x: np.ndarray, x_prime: np.ndarray) -> float:
    """exp(−2π²σ_w²‖x−x'‖²): the limit of (1/m)⟨Φ(x), Φ(x')⟩ for Gaussian frequencies."""
    if sigma_w <= 0:
        raise InvalidArgumentError(f"sigma_w must be positive, got {sigma_w}")
    delta = np.asarray(x, dtype=float) - np.asarray(x_prime, dtype=float)
    return float(np.exp(-2.0 * np.pi**2 * sigma_w**2 * float(delta @ delta)))


def kernel_width(sigma_w: float) -> float:
    """Width s of the Gaussian kernel exp(−‖δ‖²/2s²) implied by frequency scale sigma_w."""
    return 1.0 / (TWO_PI * sigma_w)
