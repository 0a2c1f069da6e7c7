"""
Empirical sketches: the mean feature vector of a dataset.

A :class:`Sketch` is an immutable snapshot (values, count, map, privacy
record, metadata). Sketches of disjoint datasets built with the same map
merge exactly into the sketch of their union; single rows can be inserted or
removed. Privatized sketches are sealed: they can be read and learned from
but never combined or edited.

Accumulation goes through :class:`SketchBuilder`, a single-writer running
mean with Kahan compensation; parallel sketching runs independent builders
and merges them.
"""

from collections.abc import Iterable, Iterator
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from sketch_learning._logging import SketchLearningLogger
from sketch_learning.core.errors import (
    IncompatibleSketchError,
    InvalidArgumentError,
    NumericalError,
    SealedSketchError,
)
from sketch_learning.core.interfaces import IRowSource
from sketch_learning.core.models import MapKind, MapParams, PrivacyRecord
from sketch_learning.core.random import stream
from sketch_learning.features.feature_map import FeatureMapSpec
from sketch_learning.sketching.reservoir import Reservoir

logger = SketchLearningLogger.get(__name__)

MAX_COUNT = 2**64 - 1
DEFAULT_BLOCK_ROWS = 4096
DEFAULT_RESERVOIR = 1000

DataSource = Union[np.ndarray, IRowSource, Iterable[np.ndarray]]


class Sketch(BaseModel):
    """Mean of Φ over a dataset, plus everything needed to interpret it."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray
    n: int = Field(ge=0, le=MAX_COUNT)
    spec: FeatureMapSpec
    privacy: Optional[PrivacyRecord] = None
    metadata: dict[str, Any] = Field(default_factory=dict)

    @field_validator("values", mode="before")
    @classmethod
    def _own_values(cls, v: Any) -> np.ndarray:
        arr = np.array(v)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _check(self) -> "Sketch":
        values = self.values
        if values.shape != (self.spec.m,):
            raise InvalidArgumentError(
                f"sketch values have shape {values.shape}, map expects ({self.spec.m},)"
            )
        if self.n == 0 and np.any(values != 0):
            raise InvalidArgumentError("an empty sketch must have zero values")
        return self

    # ------------------------------------------------------------ properties

    @property
    def m(self) -> int:
        return self.spec.m

    @property
    def map_params(self) -> MapParams:
        return self.spec.params

    @property
    def fingerprint(self) -> str:
        return self.spec.fingerprint

    @property
    def is_sealed(self) -> bool:
        return self.privacy is not None

    @property
    def total(self) -> np.ndarray:
        """Unnormalized sum n·values; additive over concatenated datasets."""
        return self.n * self.values

    @property
    def box(self) -> Optional[tuple[np.ndarray, np.ndarray]]:
        box = self.metadata.get("box")
        if not box:
            return None
        return np.asarray(box["lower"], dtype=float), np.asarray(box["upper"], dtype=float)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Sketch):
            return NotImplemented
        return (
            self.n == other.n
            and self.spec.params == other.spec.params
            and self.privacy == other.privacy
            and self.metadata == other.metadata
            and self.values.dtype == other.values.dtype
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None  # type: ignore[assignment]

    @classmethod
    def empty(cls, spec: FeatureMapSpec, metadata: Optional[dict[str, Any]] = None) -> "Sketch":
        return cls(values=np.zeros(spec.m, dtype=spec.dtype), n=0, spec=spec, metadata=metadata or {})

    def replace(self, **changes: Any) -> "Sketch":
        fields = {
            "values": self.values,
            "n": self.n,
            "spec": self.spec,
            "privacy": self.privacy,
            "metadata": self.metadata,
        }
        fields.update(changes)
        return Sketch(**fields)


# ------------------------------------------------------------------- builder


class SketchBuilder:
    """
    Single-writer streaming accumulator.

    Keeps a Kahan-compensated running mean of Φ(x) plus a reservoir subsample.
    Not thread-safe; run one builder per worker and :meth:`merge` them.
    """

    def __init__(
        self,
        spec: FeatureMapSpec,
        reservoir_size: int = DEFAULT_RESERVOIR,
        seed: int = 0,
    ):
        self.spec = spec
        self.n = 0
        self._mean = np.zeros(spec.m, dtype=spec.dtype)
        self._compensation = np.zeros(spec.m, dtype=spec.dtype)
        self.reservoir = Reservoir(reservoir_size, spec.d, stream(seed, "reservoir"))

    def _shift_mean(self, delta: np.ndarray) -> None:
        y = delta - self._compensation
        t = self._mean + y
        self._compensation = (t - self._mean) - y
        self._mean = t

    def add_block(self, block: np.ndarray, first_row: int = 0) -> None:
        block = np.asarray(block, dtype=float)
        if block.ndim != 2 or block.shape[1] != self.spec.d:
            width = block.shape[-1] if block.ndim else 0
            raise InvalidArgumentError(
                f"row {first_row}: expected {self.spec.d} columns, got {width}"
            )
        rows = block.shape[0]
        if rows == 0:
            return
        if self.n + rows > MAX_COUNT:
            raise NumericalError("sample count would overflow 64 bits")
        features = self.spec.evaluate(block)
        new_n = self.n + rows
        self._shift_mean((features.sum(axis=0) - rows * self._mean) / new_n)
        self.n = new_n
        self.reservoir.add_block(block)

    def add(self, x: np.ndarray) -> None:
        self.add_block(np.asarray(x, dtype=float)[None, :], first_row=self.n)

    def merge(self, other: "SketchBuilder") -> None:
        if other.spec.digest != self.spec.digest:
            raise IncompatibleSketchError("builders use different feature maps")
        if other.n == 0:
            return
        if self.n + other.n > MAX_COUNT:
            raise NumericalError("sample count would overflow 64 bits")
        new_n = self.n + other.n
        other_mean = other._mean - other._compensation
        self._shift_mean((other_mean - self._mean) * (other.n / new_n))
        self.n = new_n
        self.reservoir = self.reservoir.merge(other.reservoir)

    def snapshot(self, metadata: Optional[dict[str, Any]] = None) -> Sketch:
        meta = dict(metadata or {})
        box = self.reservoir.box()
        if box is not None:
            meta.setdefault("box", box)
        if self.n == 0:
            return Sketch.empty(self.spec, meta)
        return Sketch(values=self._mean - self._compensation, n=self.n, spec=self.spec, metadata=meta)


# ----------------------------------------------------------------- streaming


def iter_blocks(data: DataSource, d: int, block_rows: int = DEFAULT_BLOCK_ROWS) -> Iterator[np.ndarray]:
    """
    Normalise any supported data source into 2-D row blocks of width d.

    Accepts an (n, d) array, an :class:`IRowSource`, or an iterable of rows
    and/or row blocks. A row of the wrong width aborts with its index.
    """
    if isinstance(data, np.ndarray):
        if data.ndim != 2 or (data.shape[0] and data.shape[1] != d):
            raise InvalidArgumentError(f"expected an (n, {d}) array, got shape {data.shape}")
        for start in range(0, data.shape[0], block_rows):
            yield data[start : start + block_rows]
        return

    items: Iterable[np.ndarray] = data.blocks() if hasattr(data, "blocks") else data  # type: ignore[union-attr]
    buffer: list[np.ndarray] = []
    row_index = 0
    for item in items:
        arr = np.asarray(item, dtype=float)
        if arr.ndim == 1:
            if arr.shape[0] != d:
                raise InvalidArgumentError(f"row {row_index}: expected {d} values, got {arr.shape[0]}")
            buffer.append(arr)
            row_index += 1
            if len(buffer) == block_rows:
                yield np.vstack(buffer)
                buffer = []
            continue
        if arr.ndim != 2 or arr.shape[1] != d:
            raise InvalidArgumentError(
                f"row {row_index}: expected blocks of width {d}, got shape {arr.shape}"
            )
        if buffer:
            yield np.vstack(buffer)
            buffer = []
        yield arr
        row_index += arr.shape[0]
    if buffer:
        yield np.vstack(buffer)


def sketch_dataset(
    data: DataSource,
    spec: FeatureMapSpec,
    block_rows: int = DEFAULT_BLOCK_ROWS,
    workers: int = 1,
    reservoir_size: int = DEFAULT_RESERVOIR,
    seed: int = 0,
    metadata: Optional[dict[str, Any]] = None,
) -> Sketch:
    """
    Sketch a dataset in a single pass with O(m) memory.

    With ``workers > 1`` row blocks are dealt round-robin to independent
    builders on a thread pool and merged in worker order at the end.
    """
    workers = max(1, int(workers))
    builders = [SketchBuilder(spec, reservoir_size, seed + i) for i in range(workers)]
    rows_done = 0

    with SketchLearningLogger.timed(logger, "sketch.done", m=spec.m, kind=spec.kind.value, workers=workers) as log:
        if workers == 1:
            for block in iter_blocks(data, spec.d, block_rows):
                builders[0].add_block(block, first_row=rows_done)
                rows_done += block.shape[0]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                round_: list[tuple[np.ndarray, int]] = []
                for block in iter_blocks(data, spec.d, block_rows):
                    round_.append((block, rows_done))
                    rows_done += block.shape[0]
                    if len(round_) == workers:
                        _run_round(pool, builders, round_)
                        round_ = []
                if round_:
                    _run_round(pool, builders, round_)

        builder = builders[0]
        for other in builders[1:]:
            builder.merge(other)
        result = builder.snapshot(metadata)
        log["n"] = result.n
    if result.n == 0:
        logger.warning("sketch.empty: no rows were read; returning an empty sketch")
    return result


def _run_round(
    pool: ThreadPoolExecutor,
    builders: list[SketchBuilder],
    round_: list[tuple[np.ndarray, int]],
) -> None:
    futures = [
        pool.submit(builders[i].add_block, block, first_row)
        for i, (block, first_row) in enumerate(round_)
    ]
    for future in futures:
        future.result()


# ------------------------------------------------------------------- algebra


def _require_unsealed(*sketches: Sketch) -> None:
    for s in sketches:
        if s.is_sealed:
            raise SealedSketchError("privatized sketches can't be updated, merged, or deleted from")


def _merge_metadata(a: dict[str, Any], b: dict[str, Any]) -> dict[str, Any]:
    merged = {**b, **a}
    box_a, box_b = a.get("box"), b.get("box")
    if box_a and box_b:
        merged["box"] = {
            "lower": np.minimum(box_a["lower"], box_b["lower"]).tolist(),
            "upper": np.maximum(box_a["upper"], box_b["upper"]).tolist(),
        }
    return merged


def merge(s1: Sketch, s2: Sketch) -> Sketch:
    """Sketch of the concatenated datasets: count-weighted mean of both."""
    _require_unsealed(s1, s2)
    if s1.spec.digest != s2.spec.digest:
        raise IncompatibleSketchError(
            f"fingerprint mismatch: {s1.fingerprint[:12]} vs {s2.fingerprint[:12]}"
        )
    n = s1.n + s2.n
    if n > MAX_COUNT:
        raise NumericalError("sample count would overflow 64 bits")
    metadata = _merge_metadata(s1.metadata, s2.metadata)
    if n == 0:
        return Sketch.empty(s1.spec, metadata)
    values = s1.values + (s2.values - s1.values) * (s2.n / n)
    return Sketch(values=values, n=n, spec=s1.spec, metadata=metadata)


def update(s: Sketch, x: np.ndarray) -> Sketch:
    """Insert one sample: (n·v + Φ(x)) / (n + 1). A recorded search box grows to cover x."""
    _require_unsealed(s)
    if s.n + 1 > MAX_COUNT:
        raise NumericalError("sample count would overflow 64 bits")
    phi = _features_of(s.spec, x)
    n = s.n + 1
    metadata = s.metadata
    if s.box is not None:
        lower, upper = s.box
        x = np.asarray(x, dtype=float)
        metadata = {
            **s.metadata,
            "box": {"lower": np.minimum(lower, x).tolist(), "upper": np.maximum(upper, x).tolist()},
        }
    return s.replace(values=s.values + (phi - s.values) / n, n=n, metadata=metadata)


def delete(s: Sketch, x: np.ndarray) -> Sketch:
    """Remove one sample: (n·v − Φ(x)) / (n − 1); removing the last sample empties the sketch."""
    _require_unsealed(s)
    if s.n == 0:
        raise InvalidArgumentError("can't delete from an empty sketch")
    phi = _features_of(s.spec, x)
    if s.n == 1:
        return s.replace(values=np.zeros_like(s.values), n=0)
    n = s.n - 1
    return s.replace(values=s.values + (s.values - phi) / n, n=n)


def _features_of(spec: FeatureMapSpec, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.d,):
        raise InvalidArgumentError(f"expected a vector of length {spec.d}, got shape {x.shape}")
    return spec.evaluate(x[None, :])[0]


def sketch_distance(s1: Sketch, s2: Sketch) -> float:
    """(1/√m)‖z̃₁ − z̃₂‖, the sketch estimate of the MMD between the two datasets."""
    if s1.spec.digest != s2.spec.digest:
        raise IncompatibleSketchError("sketches use different feature maps")
    return float(np.linalg.norm(s1.values - s2.values) / np.sqrt(s1.m))


def check_kind(s: Sketch, *kinds: MapKind) -> None:
    if s.spec.kind not in kinds:
        allowed = ", ".join(k.value for k in kinds)
        raise IncompatibleSketchError(f"expected a sketch of kind {allowed}, got {s.spec.kind.value}")
