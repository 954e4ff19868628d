"""
Performance tracker for benchmark runs.
Accumulates phase timings in nanoseconds and samples process memory.
"""

import time
import threading
from contextlib import contextmanager
from typing import Dict, Any
import psutil

from monitoring.logging_config import get_logger


class PerformanceTracker:
    """
    Phase timer and memory sampler for one harness run.
    Phase totals are summed across workers, so concurrent phases add up.
    """

    def __init__(self):
        """Initialize the performance tracker."""
        self.logger = get_logger("PerformanceTracker")

        self.phase_totals_ns: Dict[str, int] = {}
        self.phase_counts: Dict[str, int] = {}
        self.peak_rss_bytes = 0

        self.lock = threading.Lock()
        self._process = psutil.Process()

    @contextmanager
    def phase(self, name: str):
        """Time the enclosed block and add it to the named phase."""
        start = time.perf_counter_ns()
        try:
            yield
        finally:
            self.add(name, time.perf_counter_ns() - start)

    def add(self, name: str, elapsed_ns: int):
        """Add an externally measured duration to a phase."""
        with self.lock:
            self.phase_totals_ns[name] = self.phase_totals_ns.get(name, 0) + int(elapsed_ns)
            self.phase_counts[name] = self.phase_counts.get(name, 0) + 1

    def get_phase_ns(self, name: str) -> int:
        """Total nanoseconds spent in a phase (0 if never entered)."""
        with self.lock:
            return self.phase_totals_ns.get(name, 0)

    def sample_memory(self) -> int:
        """Sample current resident set size and keep the peak."""
        try:
            rss = self._process.memory_info().rss
        except psutil.Error as e:
            self.logger.error(f"Error sampling process memory: {e}")
            return self.peak_rss_bytes

        with self.lock:
            self.peak_rss_bytes = max(self.peak_rss_bytes, rss)
        return rss

    def get_summary(self) -> Dict[str, Any]:
        """Get timing and memory summary."""
        with self.lock:
            return {
                'phases_ns': dict(self.phase_totals_ns),
                'phase_counts': dict(self.phase_counts),
                'peak_rss_bytes': self.peak_rss_bytes,
            }

