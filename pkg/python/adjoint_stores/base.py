"""
Access contract shared by all adjoint/tangent stores, with instrumentation
and memory accounting.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, asdict
from typing import Any, Dict, Iterable, Optional

import pandas as pd

from monitoring.logging_config import get_logger

MEMORY_REPORT_COLUMNS = [
    'strategy', 'live_slots', 'peak_slots', 'modeled_bytes', 'allocation_events', 'access_count',
]


class StoreAccessError(IndexError):
    """Raised when an identifier is outside the cells a store provides."""


@dataclass(frozen=True)
class CostModel:
    """Modeled bytes per value cell for each store layout."""
    dense_slot_bytes: int = 8
    ordered_entry_bytes: int = 48
    hash_entry_bytes: int = 24

    @classmethod
    def from_config(cls, cost_config) -> 'CostModel':
        return cls(
            dense_slot_bytes=cost_config.dense_slot_bytes,
            ordered_entry_bytes=cost_config.ordered_entry_bytes,
            hash_entry_bytes=cost_config.hash_entry_bytes,
        )


@dataclass
class StoreCounters:
    """Exact access and allocation counts of one store."""
    reads: int = 0
    writes: int = 0
    map_ops: int = 0
    allocation_events: int = 0

    @property
    def access_count(self) -> int:
        return self.reads + self.writes

    def merge(self, other: 'StoreCounters'):
        self.reads += other.reads
        self.writes += other.writes
        self.map_ops += other.map_ops
        self.allocation_events += other.allocation_events


@dataclass(frozen=True)
class StoreMemoryReport:
    """Slot accounting of a store (or an aggregate of stores)."""
    strategy: str
    live_slots: int
    peak_slots: int
    modeled_bytes: int
    allocation_events: int
    access_count: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def __add__(self, other: 'StoreMemoryReport') -> 'StoreMemoryReport':
        strategy = self.strategy if self.strategy == other.strategy else f"{self.strategy}+{other.strategy}"
        return StoreMemoryReport(
            strategy=strategy,
            live_slots=self.live_slots + other.live_slots,
            peak_slots=self.peak_slots + other.peak_slots,
            modeled_bytes=self.modeled_bytes + other.modeled_bytes,
            allocation_events=self.allocation_events + other.allocation_events,
            access_count=self.access_count + other.access_count,
        )

    @classmethod
    def empty(cls, strategy: str) -> 'StoreMemoryReport':
        return cls(strategy, 0, 0, 0, 0, 0)


def write_memory_reports_csv(reports: Iterable[StoreMemoryReport], path=None) -> Optional[str]:
    """Write reports as CSV; returns the CSV text when no path is given."""
    frame = pd.DataFrame([report.to_dict() for report in reports], columns=MEMORY_REPORT_COLUMNS)
    if path is None:
        return frame.to_csv(index=False)
    frame.to_csv(path, index=False)
    return None


class AdjointStore(ABC):
    """
    Integer-indexed collection of real cells.

    get on a never-written identifier returns 0.0. add/set/get/take on one
    identifier behave like a single real-valued cell.
    """

    kind = "abstract"

    def __init__(self, slot_bytes: int, instrumented: bool = True):
        self.slot_bytes = slot_bytes
        self.instrumented = instrumented
        self.counters = StoreCounters()
        self.peak_slots = 0
        self.logger = get_logger(type(self).__name__)

    @abstractmethod
    def get(self, identifier: int) -> float:
        """Read a cell."""

    @abstractmethod
    def add(self, identifier: int, delta: float):
        """Accumulate into a cell."""

    @abstractmethod
    def set(self, identifier: int, value: float):
        """Overwrite a cell."""

    @abstractmethod
    def take(self, identifier: int) -> float:
        """Read a cell and reset it to zero (one fused access)."""

    @abstractmethod
    def live_slots(self) -> int:
        """Currently allocated value cells."""

    @abstractmethod
    def clear(self):
        """Drop or zero all cells so the store can be reused."""

    def _note_allocation(self, slots_now: int):
        if self.instrumented:
            self.counters.allocation_events += 1
        if slots_now > self.peak_slots:
            self.peak_slots = slots_now

    def memory_report(self) -> StoreMemoryReport:
        peak = max(self.peak_slots, self.live_slots())
        return StoreMemoryReport(
            strategy=self.kind,
            live_slots=self.live_slots(),
            peak_slots=peak,
            modeled_bytes=peak * self.slot_bytes,
            allocation_events=self.counters.allocation_events,
            access_count=self.counters.access_count,
        )
