"""
Shared global adjoint vector used by all workers, guarded against resizing
during evaluations.
"""

import threading
from contextlib import contextmanager
from enum import Enum

import numpy as np

from adjoint_stores.base import AdjointStore, StoreAccessError
from monitoring.logging_config import log_store_resize

LOCK_STRIPES = 64


class SharedMode(Enum):
    PLAIN = "plain"
    ATOMIC = "atomic"


class ReadWriteGuard:
    """
    Shared/exclusive lock. Evaluations hold it shared for a whole sweep,
    resizing holds it exclusively. Acquisitions are counted.
    """

    def __init__(self):
        self._condition = threading.Condition(threading.Lock())
        self._readers = 0
        self._writer = False
        self._writers_waiting = 0
        self.shared_acquisitions = 0
        self.exclusive_acquisitions = 0
        self._per_thread = threading.local()

    @contextmanager
    def shared(self):
        with self._condition:
            while self._writer or self._writers_waiting:
                self._condition.wait()
            self._readers += 1
            self.shared_acquisitions += 1
            self._note_thread()
        try:
            yield
        finally:
            with self._condition:
                self._readers -= 1
                if self._readers == 0:
                    self._condition.notify_all()

    @contextmanager
    def exclusive(self):
        with self._condition:
            self._writers_waiting += 1
            while self._writer or self._readers:
                self._condition.wait()
            self._writers_waiting -= 1
            self._writer = True
            self.exclusive_acquisitions += 1
            self._note_thread()
        try:
            yield
        finally:
            with self._condition:
                self._writer = False
                self._condition.notify_all()

    def _note_thread(self):
        self._per_thread.count = getattr(self._per_thread, "count", 0) + 1

    @property
    def acquisitions(self) -> int:
        return self.shared_acquisitions + self.exclusive_acquisitions

    def thread_acquisitions(self) -> int:
        """Acquisitions made by the calling thread."""
        return getattr(self._per_thread, "count", 0)


class SharedGlobalVector(AdjointStore):
    """
    Dense vector indexed by identifier, shared by all workers.

    In atomic mode add is a locked read-modify-write (striped locks), so
    concurrent contributions to one cell are never lost. Plain mode performs an
    unsynchronized read-modify-write and is unsound when regions share inputs.
    """

    kind = "shared_global"

    def __init__(self, mode: SharedMode = SharedMode.ATOMIC, slot_bytes: int = 8, instrumented: bool = True):
        super().__init__(slot_bytes, instrumented)
        self.mode = SharedMode(mode)
        self.kind = "shared_global_atomic" if self.mode is SharedMode.ATOMIC else "shared_global"
        self.resize_guard = ReadWriteGuard()
        self._data = np.zeros(0, dtype=np.float64)
        self._stripes = [threading.Lock() for _ in range(LOCK_STRIPES)]
        self._stripe_counts = threading.local()
        self._counter_lock = threading.Lock()

    @property
    def atomic(self) -> bool:
        return self.mode is SharedMode.ATOMIC

    def ensure_size(self, max_id: int) -> bool:
        """Grow to at least max_id + 1 cells under the exclusive guard. Never shrinks."""
        with self.resize_guard.exclusive():
            old = self._data.shape[0]
            if max_id + 1 <= old:
                return False
            grown = np.zeros(max_id + 1, dtype=np.float64)
            grown[:old] = self._data
            self._data = grown
            with self._counter_lock:
                self._note_allocation(max_id + 1)
        log_store_resize(self.kind, old, max_id + 1)
        return True

    @contextmanager
    def evaluation(self):
        """Hold the guard shared for the duration of a sweep."""
        with self.resize_guard.shared():
            yield self

    def _check(self, identifier: int):
        if identifier < 0 or identifier >= self._data.shape[0]:
            raise StoreAccessError(
                f"Identifier {identifier} beyond shared vector of {self._data.shape[0]} cells; "
                f"call ensure_size first"
            )

    def _stripe(self, identifier: int):
        if self.instrumented:
            self._stripe_counts.count = getattr(self._stripe_counts, "count", 0) + 1
        return self._stripes[identifier % LOCK_STRIPES]

    def thread_lock_acquisitions(self) -> int:
        """Guard plus stripe-lock acquisitions made by the calling thread (stripes only when instrumented)."""
        return self.resize_guard.thread_acquisitions() + getattr(self._stripe_counts, "count", 0)

    def _count(self, reads: int, writes: int):
        with self._counter_lock:
            self.counters.reads += reads
            self.counters.writes += writes

    def get(self, identifier: int) -> float:
        self._check(identifier)
        if self.instrumented:
            self._count(1, 0)
        return float(self._data[identifier])

    def add(self, identifier: int, delta: float):
        self._check(identifier)
        if self.instrumented:
            self._count(1, 1)
        data = self._data
        if self.mode is SharedMode.ATOMIC:
            with self._stripe(identifier):
                data[identifier] += delta
        else:
            current = data[identifier]
            data[identifier] = current + delta

    def set(self, identifier: int, value: float):
        self._check(identifier)
        if self.instrumented:
            self._count(0, 1)
        if self.mode is SharedMode.ATOMIC:
            with self._stripe(identifier):
                self._data[identifier] = value
        else:
            self._data[identifier] = value

    def take(self, identifier: int) -> float:
        self._check(identifier)
        if self.instrumented:
            self._count(1, 0)
        data = self._data
        if self.mode is SharedMode.ATOMIC:
            with self._stripe(identifier):
                value = float(data[identifier])
                data[identifier] = 0.0
            return value
        value = float(data[identifier])
        data[identifier] = 0.0
        return value

    def live_slots(self) -> int:
        return int(self._data.shape[0])

    def clear(self):
        with self.resize_guard.exclusive():
            self._data.fill(0.0)
