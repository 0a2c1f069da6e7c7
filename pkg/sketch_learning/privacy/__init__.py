"""Sensitivity-calibrated noise for publishing sketches."""

from sketch_learning.privacy.mechanisms import (
    SensitivityBounds,
    gaussian_sigma,
    privatize_gaussian,
    privatize_laplace,
    sensitivity,
)

__all__ = [
    "SensitivityBounds",
    "gaussian_sigma",
    "privatize_gaussian",
    "privatize_laplace",
    "sensitivity",
]
