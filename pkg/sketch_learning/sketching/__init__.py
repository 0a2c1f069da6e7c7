"""Sketch values, streaming accumulation, the merge algebra and file formats."""

from sketch_learning.sketching.csv_source import CsvRowSource, read_csv_matrix, write_csv_matrix
from sketch_learning.sketching.io import deserialize, from_json, load, save, serialize, to_json
from sketch_learning.sketching.reservoir import Reservoir
from sketch_learning.sketching.sketch import (
    Sketch,
    SketchBuilder,
    check_kind,
    delete,
    iter_blocks,
    merge,
    sketch_dataset,
    sketch_distance,
    update,
)

__all__ = [
    "CsvRowSource",
    "Reservoir",
    "Sketch",
    "SketchBuilder",
    "check_kind",
    "delete",
    "deserialize",
    "from_json",
    "iter_blocks",
    "load",
    "merge",
    "read_csv_matrix",
    "save",
    "serialize",
    "sketch_dataset",
    "sketch_distance",
    "to_json",
    "update",
    "write_csv_matrix",
]
