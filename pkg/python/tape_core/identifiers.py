"""
Identifier management for recorded values.
Identifiers are virtual addresses into adjoint storage; 0 marks passive data.
"""

import threading

PASSIVE_ID = 0


class IdentifierCounter:
    """
    Strictly increasing identifier source shared by all tapes of a recording.
    Identifiers are never reused.
    """

    def __init__(self, last_assigned: int = 0):
        self._last = int(last_assigned)
        self._lock = threading.Lock()

    def next(self) -> int:
        """Assign the next identifier."""
        with self._lock:
            self._last += 1
            return self._last

    def reserve(self, count: int) -> range:
        """Assign a contiguous block of identifiers."""
        if count < 0:
            raise ValueError(f"Cannot reserve a negative identifier count: {count}")
        with self._lock:
            first = self._last + 1
            self._last += count
            return range(first, self._last + 1)

    @property
    def current(self) -> int:
        """Largest identifier assigned so far."""
        return self._last

    def __deepcopy__(self, memo):
        clone = IdentifierCounter(self._last)
        memo[id(self)] = clone
        return clone

    def __repr__(self):
        return f"IdentifierCounter(current={self._last})"
