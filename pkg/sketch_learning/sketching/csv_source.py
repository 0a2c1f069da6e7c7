"""
Streaming CSV reader for sketching.

Reads a comma-separated file with a header row in fixed-size chunks via
``pandas.read_csv(chunksize=...)`` so memory stays bounded by the chunk size.
Malformed values and short or long rows are reported with their 1-based
file line number.
"""

from collections.abc import Iterator
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
import pandas as pd

from sketch_learning._logging import SketchLearningLogger
from sketch_learning.core.errors import SketchFormatError

logger = SketchLearningLogger.get(__name__)


class CsvRowSource:
    """:class:`IRowSource` over a CSV file; every column is a float feature."""

    def __init__(
        self,
        path: Union[str, Path],
        block_rows: int = 4096,
        read_csv_kwargs: Optional[dict[str, Any]] = None,
    ):
        self.path = Path(path)
        self.block_rows = int(block_rows)
        self.read_csv_kwargs = dict(read_csv_kwargs or {})
        self.columns = self._read_header()

    @property
    def d(self) -> int:
        return len(self.columns)

    def _read_header(self) -> list[str]:
        try:
            header = pd.read_csv(self.path, nrows=0, **self.read_csv_kwargs)
        except FileNotFoundError as exc:
            raise SketchFormatError(f"no such data file: {self.path}") from exc
        except pd.errors.EmptyDataError as exc:
            raise SketchFormatError(f"{self.path} is empty; expected a header row") from exc
        except pd.errors.ParserError as exc:
            raise SketchFormatError(f"{self.path}: {exc}") from exc
        if header.shape[1] == 0:
            raise SketchFormatError(f"{self.path} has no columns")
        return [str(c) for c in header.columns]

    def blocks(self) -> Iterator[np.ndarray]:
        """
        Yield float blocks of at most ``block_rows`` rows; blank lines are skipped.

        Blank lines still count toward the line numbers in error messages.
        """
        first_line = 2  # line 1 is the header
        rows = 0
        kwargs = {**self.read_csv_kwargs, "skip_blank_lines": False}
        try:
            reader = pd.read_csv(self.path, chunksize=self.block_rows, dtype=str, **kwargs)
            for chunk in reader:
                if chunk.empty:
                    continue
                if list(chunk.columns) != self.columns:
                    raise SketchFormatError(f"{self.path}: header changed while reading")
                blank = chunk.isna().all(axis=1).to_numpy()
                numeric = chunk.apply(pd.to_numeric, errors="coerce")
                bad = numeric.isna().any(axis=1).to_numpy() & ~blank
                if bad.any():
                    row = int(np.argmax(bad))
                    line = first_line + row
                    raw = ",".join("" if pd.isna(v) else str(v) for v in chunk.iloc[row].tolist())
                    raise SketchFormatError(f"{self.path}:{line}: malformed row {raw!r}")
                first_line += chunk.shape[0]
                if blank.all():
                    continue
                block = numeric.to_numpy(dtype=float)[~blank]
                rows += block.shape[0]
                yield block
        except pd.errors.ParserError as exc:
            raise SketchFormatError(f"{self.path}: {exc}") from exc
        logger.debug("csv.read: path=%s rows=%d lines=%d", self.path, rows, first_line - 1)


def read_csv_matrix(path: Union[str, Path]) -> np.ndarray:
    """Whole-file convenience for evaluation (loads everything)."""
    source = CsvRowSource(path)
    blocks = list(source.blocks())
    if not blocks:
        return np.empty((0, source.d))
    return np.vstack(blocks)


def write_csv_matrix(path: Union[str, Path], data: np.ndarray, columns: Optional[list[str]] = None) -> None:
    columns = columns or [f"x{i}" for i in range(data.shape[1])]
    pd.DataFrame(data, columns=columns).to_csv(path, index=False, float_format="%.17g")
