"""Random linear stage: dense Gaussian and structured Hadamard operators."""

from sketch_learning.transform.hadamard import fwht, is_power_of_two
from sketch_learning.transform.operator import (
    FrequencyOperator,
    apply,
    build_dense,
    build_operator,
    build_structured,
    from_coefficients,
)

__all__ = [
    "FrequencyOperator",
    "apply",
    "build_dense",
    "build_operator",
    "build_structured",
    "from_coefficients",
    "fwht",
    "is_power_of_two",
]
