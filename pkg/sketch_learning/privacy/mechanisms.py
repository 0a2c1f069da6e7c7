"""
Differentially private sketch release.

Neighboring datasets differ by replacing one of n samples (n is public).
Noise is added to the mean sketch, so the sensitivities already carry the
1/n factor. Complex sketches are treated as 2m real coordinates, drawn real
then imaginary per frequency.

Sensitivities (replace-one, mean sketch):

=============  =======================  ====================
map            L1                       L2
=============  =======================  ====================
rff_complex    2√2·m / n                2√m / n
rff_quantized  2m / n                   2√m / n
quadratic      Σ_j ‖w_j‖² r² / n        √(Σ_j ‖w_j‖⁴) r² / n
outer_product  2d r² / n                2 r² / n
=============  =======================  ====================

The last two need a bound r on ‖x‖.
"""

import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from sketch_learning._logging import SketchLearningLogger
from sketch_learning.core.errors import InvalidArgumentError, SealedSketchError
from sketch_learning.core.models import MapKind, PrivacyMechanism, PrivacyRecord
from sketch_learning.core.random import stream
from sketch_learning.features.feature_map import FeatureMapSpec
from sketch_learning.sketching.sketch import Sketch

logger = SketchLearningLogger.get(__name__)


class SensitivityBounds(BaseModel):
    model_config = ConfigDict(frozen=True)

    l1: float = Field(ge=0)
    l2: float = Field(ge=0)


def sensitivity(spec: FeatureMapSpec, n: int, radius: Optional[float] = None) -> SensitivityBounds:
    """Replace-one L1/L2 sensitivity of the mean sketch of n samples."""
    if n < 1:
        raise InvalidArgumentError(f"sensitivity needs n >= 1, got {n}")
    m = spec.m
    if spec.kind is MapKind.RFF_COMPLEX:
        return SensitivityBounds(l1=2.0 * math.sqrt(2.0) * m / n, l2=2.0 * math.sqrt(m) / n)
    if spec.kind is MapKind.RFF_QUANTIZED:
        return SensitivityBounds(l1=2.0 * m / n, l2=2.0 * math.sqrt(m) / n)

    if radius is None:
        raise InvalidArgumentError(
            f"{spec.kind.value} features are unbounded; supply a data radius bound r >= ‖x‖"
        )
    if radius <= 0:
        raise InvalidArgumentError(f"radius must be positive, got {radius}")
    r2 = radius * radius
    if spec.kind is MapKind.QUADRATIC:
        row_norms = np.sum(spec.frequencies**2, axis=1)
        return SensitivityBounds(
            l1=float(row_norms.sum()) * r2 / n,
            l2=float(np.sqrt(np.sum(row_norms**2))) * r2 / n,
        )
    return SensitivityBounds(l1=2.0 * spec.d * r2 / n, l2=2.0 * r2 / n)


def gaussian_sigma(l2: float, epsilon: float, delta: float) -> float:
    """σ = l2·√(2 ln(1.25/δ))/ε, valid for ε ∈ (0, 1], δ ∈ (0, 1)."""
    _check_gaussian(epsilon, delta)
    return l2 * math.sqrt(2.0 * math.log(1.25 / delta)) / epsilon


def _check_gaussian(epsilon: float, delta: float) -> None:
    if not 0 < epsilon <= 1:
        raise InvalidArgumentError(f"the Gaussian mechanism needs epsilon in (0, 1], got {epsilon}")
    if not 0 < delta < 1:
        raise InvalidArgumentError(f"the Gaussian mechanism needs delta in (0, 1), got {delta}")


def _add_noise(s: Sketch, noise: np.ndarray, record: PrivacyRecord, keep_box: bool) -> Sketch:
    values = s.values
    if np.iscomplexobj(values):
        values = values + (noise[0::2] + 1j * noise[1::2])
    else:
        values = values + noise
    metadata = dict(s.metadata)
    if not keep_box and metadata.pop("box", None) is not None:
        logger.info("privacy.box_dropped: the reservoir box is data-dependent and isn't released")
    return s.replace(values=values, privacy=record, metadata=metadata)


def _check_input(s: Sketch) -> None:
    if s.is_sealed:
        raise SealedSketchError("sketch is already privatized")
    if s.n == 0:
        raise InvalidArgumentError("can't privatize an empty sketch")


def _coordinates(s: Sketch) -> int:
    return 2 * s.m if s.spec.is_complex else s.m


def privatize_laplace(
    s: Sketch,
    epsilon: float,
    seed: int = 0,
    radius: Optional[float] = None,
    keep_box: bool = False,
) -> Sketch:
    """ε-DP release: iid Laplace(l1/ε) noise on every real coordinate."""
    _check_input(s)
    if epsilon <= 0:
        raise InvalidArgumentError(f"epsilon must be positive, got {epsilon}")
    scale = sensitivity(s.spec, s.n, radius).l1 / epsilon
    noise = stream(seed, "privacy").laplace(0.0, scale, _coordinates(s))
    logger.info("privacy.laplace: epsilon=%g scale=%.6g m=%d n=%d", epsilon, scale, s.m, s.n)
    record = PrivacyRecord(mechanism=PrivacyMechanism.LAPLACE, epsilon=epsilon, delta=0.0)
    return _add_noise(s, noise, record, keep_box)


def privatize_gaussian(
    s: Sketch,
    epsilon: float,
    delta: float,
    seed: int = 0,
    radius: Optional[float] = None,
    keep_box: bool = False,
) -> Sketch:
    """(ε, δ)-DP release: iid N(0, σ²) noise with σ from the L2 sensitivity."""
    _check_input(s)
    sigma = gaussian_sigma(sensitivity(s.spec, s.n, radius).l2, epsilon, delta)
    noise = stream(seed, "privacy").normal(0.0, sigma, _coordinates(s))
    logger.info("privacy.gaussian: epsilon=%g delta=%g sigma=%.6g m=%d n=%d", epsilon, delta, sigma, s.m, s.n)
    record = PrivacyRecord(mechanism=PrivacyMechanism.GAUSSIAN, epsilon=epsilon, delta=delta)
    return _add_noise(s, noise, record, keep_box)
