"""Feature maps Φ and the closed-form atoms solvers fit against."""

from sketch_learning.features.atoms import (
    QUANTIZED_KERNEL_CONSTANT,
    atom_gradient,
    decoding_phase,
    dirac_atom,
    expected_kernel,
    gaussian_atom,
    kernel_width,
    quantized_kernel_constant,
)
from sketch_learning.features.feature_map import (
    FeatureMapSpec,
    feature_map_for,
    fingerprint_digest,
    outer_product,
    quadratic,
    rff,
    rff_dithered,
    rff_quantized,
)

__all__ = [
    "QUANTIZED_KERNEL_CONSTANT",
    "FeatureMapSpec",
    "atom_gradient",
    "decoding_phase",
    "dirac_atom",
    "expected_kernel",
    "feature_map_for",
    "fingerprint_digest",
    "gaussian_atom",
    "kernel_width",
    "outer_product",
    "quadratic",
    "quantized_kernel_constant",
    "rff",
    "rff_dithered",
    "rff_quantized",
]
