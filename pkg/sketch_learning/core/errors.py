"""
Exception hierarchy for the sketch_learning package.

Every error raised on purpose by the package derives from
:class:`SketchLearningError`. Each subclass also derives from the builtin a
caller would naturally catch (``ValueError`` for bad inputs, ``RuntimeError``
for state and numerical failures) and carries the CLI exit code it maps to.
"""


class SketchLearningError(Exception):
    """Base class for all package errors."""

    exit_code: int = 1


class InvalidArgumentError(SketchLearningError, ValueError):
    """Bad dimensions, non-positive scales, or an operation on the wrong map kind."""

    exit_code = 2


class SketchFormatError(SketchLearningError, ValueError):
    """Unreadable sketch file, corrupted header, or malformed input rows."""

    exit_code = 3


class IncompatibleSketchError(SketchLearningError, ValueError):
    """Two sketches (or a sketch and a map) were built with different feature maps."""

    exit_code = 4


class SealedSketchError(SketchLearningError, RuntimeError):
    """A privatized sketch was used where only privacy-free sketches are allowed."""

    exit_code = 5


class NumericalError(SketchLearningError, RuntimeError):
    """Ill-conditioned systems, non-finite objectives, or broken monotonicity."""

    exit_code = 6
