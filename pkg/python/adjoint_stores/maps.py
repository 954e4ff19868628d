"""
Associative adjoint stores populated on the fly.

Every contract call is one map operation. get and take on an absent
identifier return 0.0 without inserting; add and set insert.
"""

from sortedcontainers import SortedDict

from adjoint_stores.base import AdjointStore


class MapAdjointStore(AdjointStore):
    """Common logic of the ordered and hashed map stores."""

    kind = "map"

    def __init__(self, slot_bytes: int, instrumented: bool = True):
        super().__init__(slot_bytes, instrumented)
        self._entries = self._new_entries()
        # Creating the container (buckets, header node) is one allocation event
        self._note_allocation(0)

    def _new_entries(self):
        raise NotImplementedError

    def _count(self, reads: int, writes: int):
        counters = self.counters
        counters.reads += reads
        counters.writes += writes
        counters.map_ops += 1

    def _insert(self, identifier: int, value: float):
        entries = self._entries
        if identifier not in entries:
            if self.instrumented:
                self.counters.allocation_events += 1
            entries[identifier] = value
            if len(entries) > self.peak_slots:
                self.peak_slots = len(entries)
        else:
            entries[identifier] = value

    def get(self, identifier: int) -> float:
        if self.instrumented:
            self._count(1, 0)
        return self._entries.get(identifier, 0.0)

    def add(self, identifier: int, delta: float):
        if self.instrumented:
            self._count(1, 1)
        self._insert(identifier, self._entries.get(identifier, 0.0) + delta)

    def set(self, identifier: int, value: float):
        if self.instrumented:
            self._count(0, 1)
        self._insert(identifier, value)

    def take(self, identifier: int) -> float:
        if self.instrumented:
            self._count(1, 0)
        entries = self._entries
        value = entries.get(identifier)
        if value is None:
            return 0.0
        entries[identifier] = 0.0
        return value

    def live_slots(self) -> int:
        return len(self._entries)

    def clear(self):
        """Drop all entries; the container itself is kept for reuse."""
        self._entries.clear()

    def identifiers(self) -> list:
        return list(self._entries.keys())


class OrderedMapStore(MapAdjointStore):
    """Ordered map (sorted by identifier)."""

    kind = "ordered_map"

    def _new_entries(self):
        return SortedDict()


class HashMapStore(MapAdjointStore):
    """Hash map."""

    kind = "hash_map"

    def _new_entries(self):
        return {}
