"""
Dense thread-local adjoint vectors backed by numpy arrays.
"""

import numpy as np

from adjoint_stores.base import AdjointStore, StoreAccessError
from monitoring.logging_config import log_store_resize


class DenseAdjointVector(AdjointStore):
    """Dense store addressing data[id - offset] for ids in [offset, offset + size)."""

    kind = "dense"

    def __init__(self, size: int, offset: int = 0, slot_bytes: int = 8, instrumented: bool = True):
        super().__init__(slot_bytes, instrumented)
        if size < 0:
            raise ValueError(f"Dense store size must be non-negative, got {size}")
        self.offset = offset
        self._data = np.zeros(size, dtype=np.float64)
        self._note_allocation(size)

    def _index(self, identifier: int) -> int:
        index = identifier - self.offset
        if index < 0 or index >= self._data.shape[0]:
            raise StoreAccessError(
                f"Identifier {identifier} outside [{self.offset}, {self.offset + self._data.shape[0] - 1}] "
                f"of {self.kind}"
            )
        return index

    def get(self, identifier: int) -> float:
        index = self._index(identifier)
        if self.instrumented:
            self.counters.reads += 1
        return float(self._data[index])

    def add(self, identifier: int, delta: float):
        index = self._index(identifier)
        if self.instrumented:
            self.counters.reads += 1
            self.counters.writes += 1
        self._data[index] += delta

    def set(self, identifier: int, value: float):
        index = self._index(identifier)
        if self.instrumented:
            self.counters.writes += 1
        self._data[index] = value

    def take(self, identifier: int) -> float:
        index = self._index(identifier)
        if self.instrumented:
            self.counters.reads += 1
        value = float(self._data[index])
        self._data[index] = 0.0
        return value

    def live_slots(self) -> int:
        return int(self._data.shape[0])

    def clear(self):
        self._data.fill(0.0)

    def values(self) -> np.ndarray:
        """Read-only view of the cells (no access counting)."""
        view = self._data.view()
        view.flags.writeable = False
        return view


class FullLocalVector(DenseAdjointVector):
    """
    Persistent per-worker vector indexed directly by identifier.
    Grows on demand and never shrinks.
    """

    kind = "full_vector"

    def __init__(self, i_max: int = 0, slot_bytes: int = 8, instrumented: bool = True):
        super().__init__(i_max + 1, 0, slot_bytes, instrumented)

    def ensure_size(self, max_id: int) -> bool:
        """Grow to at least max_id + 1 cells; returns True if an allocation happened."""
        old = self._data.shape[0]
        if max_id + 1 <= old:
            return False
        grown = np.zeros(max_id + 1, dtype=np.float64)
        grown[:old] = self._data
        self._data = grown
        self._note_allocation(max_id + 1)
        log_store_resize(self.kind, old, max_id + 1)
        return True


class OffsetLocalVector(DenseAdjointVector):
    """Vector of size max - min + 1 covering exactly the identifiers [min_id, max_id]."""

    kind = "offset_vector"

    def __init__(self, min_id: int, max_id: int, slot_bytes: int = 8, instrumented: bool = True):
        if max_id < min_id:
            raise ValueError(f"Empty identifier range [{min_id}, {max_id}]")
        super().__init__(max_id - min_id + 1, min_id, slot_bytes, instrumented)
        self.min_id = min_id
        self.max_id = max_id
