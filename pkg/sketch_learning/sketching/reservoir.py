"""
Uniform reservoir subsample kept alongside a sketch.

The reservoir feeds two heuristics that need a glimpse of raw data: the solver
search box (per-coordinate min/max) and the automatic frequency scale (median
pairwise distance). Reservoirs merge exactly: the merged sample is a uniform
draw from the union of both streams.
"""

from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist


class Reservoir:
    """Algorithm-R reservoir over rows of fixed width."""

    def __init__(self, capacity: int, d: int, rng: np.random.Generator):
        self.capacity = int(capacity)
        self.d = int(d)
        self.seen = 0
        self._rows = np.empty((0, d))
        self._rng = rng

    @property
    def rows(self) -> np.ndarray:
        return self._rows

    def add_block(self, block: np.ndarray) -> None:
        if self.capacity == 0 or block.shape[0] == 0:
            self.seen += block.shape[0]
            return
        free = self.capacity - self._rows.shape[0]
        if free > 0:
            head = block[:free]
            self._rows = np.vstack([self._rows, head])
            self.seen += head.shape[0]
            block = block[free:]
        if block.shape[0] == 0:
            return
        # row with global index t (0-based) replaces a random slot with probability capacity/(t+1)
        positions = self.seen + np.arange(block.shape[0])
        slots = np.floor(self._rng.random(block.shape[0]) * (positions + 1)).astype(np.int64)
        keep = slots < self.capacity
        for row, slot in zip(block[keep], slots[keep], strict=True):
            self._rows[slot] = row
        self.seen += block.shape[0]

    def merge(self, other: "Reservoir") -> "Reservoir":
        """Uniform subsample of the union of both underlying streams."""
        merged = Reservoir(self.capacity, self.d, self._rng)
        merged.seen = self.seen + other.seen
        size = min(self.capacity, self._rows.shape[0] + other._rows.shape[0])
        if size == 0:
            return merged
        if self.seen == 0 or other.seen == 0:
            source = self if other.seen == 0 else other
            merged._rows = source._rows[:size].copy()
            return merged
        # split the merged sample between the two streams in proportion to their sizes
        from_self = int(self._rng.hypergeometric(self.seen, other.seen, size))
        from_self = min(from_self, self._rows.shape[0])
        from_other = min(size - from_self, other._rows.shape[0])
        pick_self = self._rng.choice(self._rows.shape[0], size=from_self, replace=False)
        pick_other = self._rng.choice(other._rows.shape[0], size=from_other, replace=False)
        merged._rows = np.vstack([self._rows[np.sort(pick_self)], other._rows[np.sort(pick_other)]])
        return merged

    def box(self) -> Optional[dict[str, list[float]]]:
        if self._rows.shape[0] == 0:
            return None
        return {
            "lower": self._rows.min(axis=0).tolist(),
            "upper": self._rows.max(axis=0).tolist(),
        }

    def median_pairwise_distance(self) -> float:
        if self._rows.shape[0] < 2:
            return 0.0
        return float(np.median(pdist(self._rows)))
