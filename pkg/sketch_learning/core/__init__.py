"""Core models, errors, protocols and random streams."""

from sketch_learning.core.errors import (
    IncompatibleSketchError,
    InvalidArgumentError,
    NumericalError,
    SealedSketchError,
    SketchFormatError,
    SketchLearningError,
)
from sketch_learning.core.interfaces import IAtomFamily, IRowSource
from sketch_learning.core.models import (
    CentroidModel,
    GmmModel,
    LowRankPsd,
    MapKind,
    MapParams,
    OperatorKind,
    OperatorParams,
    PrivacyMechanism,
    PrivacyRecord,
    RegressionModel,
    SolverOptions,
    SyntheticSpec,
    Task,
    model_from_document,
)
from sketch_learning.core.random import stream

__all__ = [
    "CentroidModel",
    "GmmModel",
    "IAtomFamily",
    "IRowSource",
    "IncompatibleSketchError",
    "InvalidArgumentError",
    "LowRankPsd",
    "MapKind",
    "MapParams",
    "NumericalError",
    "OperatorKind",
    "OperatorParams",
    "PrivacyMechanism",
    "PrivacyRecord",
    "RegressionModel",
    "SealedSketchError",
    "SketchFormatError",
    "SketchLearningError",
    "SolverOptions",
    "SyntheticSpec",
    "Task",
    "model_from_document",
    "stream",
]
