"""
Tests for the shared and thread-local adjoint stores.
"""

import threading
import unittest
import sys
import os

import numpy as np

# Add the python directory to the path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', '..', 'python'))

from adjoint_stores import (
    CostModel, FullLocalVector, HashMapStore, LocalStrategy, MEMORY_REPORT_COLUMNS, OffsetLocalVector,
    OrderedMapStore, RegionInfo, SharedGlobalVector, SharedMode, StoreAccessError, StoreMemoryReport,
    make_local_store, write_memory_reports_csv,
)


class StoreContractMixin:
    """Cell semantics every store must provide."""

    def make_store(self):
        raise NotImplementedError

    def test_cell_semantics(self):
        store = self.make_store()
        self.assertEqual(store.get(5), 0.0)
        store.add(5, 1.5)
        store.add(5, 2.0)
        self.assertEqual(store.get(5), 3.5)
        store.set(5, -1.0)
        self.assertEqual(store.take(5), -1.0)
        self.assertEqual(store.get(5), 0.0)

    def test_clear(self):
        store = self.make_store()
        store.set(3, 4.0)
        store.clear()
        self.assertEqual(store.get(3), 0.0)

    def test_uninstrumented_counts_nothing(self):
        store = self.make_store()
        store.instrumented = False
        reads, writes = store.counters.reads, store.counters.writes
        store.add(4, 1.0)
        store.get(4)
        self.assertEqual((store.counters.reads, store.counters.writes), (reads, writes))


class TestFullLocalVector(StoreContractMixin, unittest.TestCase):
    """Test cases for the persistent full local vector."""

    def make_store(self):
        return FullLocalVector(10)

    def test_sized_to_i_max(self):
        store = FullLocalVector(99)
        self.assertEqual(store.live_slots(), 100)
        self.assertEqual(store.counters.allocation_events, 1)
        with self.assertRaises(StoreAccessError):
            store.get(100)

    def test_ensure_size_grows_and_keeps_values(self):
        store = FullLocalVector(10)
        store.set(7, 2.5)
        self.assertFalse(store.ensure_size(10))
        self.assertTrue(store.ensure_size(50))
        self.assertEqual(store.live_slots(), 51)
        self.assertEqual(store.get(7), 2.5)
        self.assertEqual(store.counters.allocation_events, 2)

    def test_values_view_is_read_only(self):
        store = FullLocalVector(4)
        with self.assertRaises(ValueError):
            store.values()[1] = 1.0


class TestOffsetLocalVector(StoreContractMixin, unittest.TestCase):
    """Test cases for the offset-addressed vector."""

    def make_store(self):
        return OffsetLocalVector(3, 12)

    def test_range(self):
        store = OffsetLocalVector(100, 109)
        self.assertEqual(store.live_slots(), 10)
        store.set(100, 1.0)
        store.set(109, 2.0)
        with self.assertRaises(StoreAccessError):
            store.get(99)
        with self.assertRaises(StoreAccessError):
            store.add(110, 1.0)
        with self.assertRaises(ValueError):
            OffsetLocalVector(5, 4)

    def test_memory_report(self):
        report = OffsetLocalVector(10, 19, slot_bytes=8).memory_report()
        self.assertEqual(report.strategy, "offset_vector")
        self.assertEqual(report.peak_slots, 10)
        self.assertEqual(report.modeled_bytes, 80)


class TestOrderedMapStore(StoreContractMixin, unittest.TestCase):
    """Test cases for the ordered map store."""

    def make_store(self):
        return OrderedMapStore(48)

    def test_keys_sorted(self):
        store = self.make_store()
        for identifier in (9, 2, 5):
            store.set(identifier, 1.0)
        self.assertEqual(store.identifiers(), [2, 5, 9])


class TestHashMapStore(StoreContractMixin, unittest.TestCase):
    """Test cases for the hash map store and map accounting."""

    def make_store(self):
        return HashMapStore(24)

    def test_absent_reads_do_not_insert(self):
        store = self.make_store()
        store.get(1)
        self.assertEqual(store.take(2), 0.0)
        self.assertEqual(store.live_slots(), 0)
        store.add(3, 1.0)
        store.set(4, 1.0)
        self.assertEqual(store.live_slots(), 2)

    def test_map_operations_and_allocations(self):
        """One map operation per call; container creation and each new entry allocate."""
        store = self.make_store()
        self.assertEqual(store.counters.allocation_events, 1)
        store.add(1, 1.0)
        store.add(1, 1.0)
        store.get(1)
        store.take(1)
        store.set(2, 0.5)
        self.assertEqual(store.counters.map_ops, 5)
        self.assertEqual(store.counters.allocation_events, 3)
        self.assertEqual(store.counters.access_count, 7)

    def test_peak_survives_clear(self):
        store = self.make_store()
        for identifier in range(1, 8):
            store.set(identifier, 1.0)
        store.clear()
        report = store.memory_report()
        self.assertEqual(report.live_slots, 0)
        self.assertEqual(report.peak_slots, 7)
        self.assertEqual(report.modeled_bytes, 7 * 24)


class TestSharedGlobalVector(unittest.TestCase):
    """Test cases for the shared global adjoint vector."""

    def test_requires_sizing(self):
        store = SharedGlobalVector(SharedMode.ATOMIC)
        with self.assertRaises(StoreAccessError):
            store.get(1)
        self.assertTrue(store.ensure_size(10))
        store.add(10, 1.0)
        self.assertEqual(store.get(10), 1.0)
        self.assertFalse(store.ensure_size(5))

    def test_kind_follows_mode(self):
        self.assertEqual(SharedGlobalVector(SharedMode.PLAIN).kind, "shared_global")
        self.assertEqual(SharedGlobalVector(SharedMode.ATOMIC).kind, "shared_global_atomic")

    def test_guard_acquisitions(self):
        store = SharedGlobalVector(SharedMode.ATOMIC)
        store.ensure_size(4)
        store.ensure_size(2)
        with store.evaluation():
            store.set(1, 1.0)
        self.assertEqual(store.resize_guard.exclusive_acquisitions, 2)
        self.assertEqual(store.resize_guard.shared_acquisitions, 1)
        self.assertEqual(store.resize_guard.acquisitions, 3)

    def test_atomic_adds_are_not_lost(self):
        """Concurrent contributions to one cell all arrive in atomic mode."""
        store = SharedGlobalVector(SharedMode.ATOMIC)
        store.ensure_size(1)

        def contribute():
            with store.evaluation():
                for _ in range(1000):
                    store.add(1, 1.0)

        threads = [threading.Thread(target=contribute) for _ in range(8)]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()
        self.assertEqual(store.get(1), 8000.0)
        self.assertEqual(store.counters.access_count, 16001)

    def test_concurrent_resizing(self):
        """Workers grow the vector between evaluations; no cell written earlier is lost."""
        store = SharedGlobalVector(SharedMode.ATOMIC)
        store.ensure_size(1)
        requested = {worker: [1000 * (i + 1) + worker for i in range(50)] for worker in range(4)}

        def work(worker):
            for size in requested[worker]:
                store.ensure_size(size)
                with store.evaluation():
                    store.add(0, 1.0)
                    store.add(size, 1.0)

        threads = [threading.Thread(target=work, args=(worker,)) for worker in requested]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()

        self.assertEqual(store.live_slots(), 50003 + 1)
        self.assertEqual(store.get(0), 200.0)
        for sizes in requested.values():
            self.assertTrue(all(store.get(size) == 1.0 for size in sizes))

    def test_lock_acquisitions_per_thread(self):
        store = SharedGlobalVector(SharedMode.PLAIN)
        store.ensure_size(3)
        counts = {}

        def work(worker):
            for _ in range(worker + 1):
                with store.evaluation():
                    store.add(1, 1.0)
            counts[worker] = store.thread_lock_acquisitions()

        threads = [threading.Thread(target=work, args=(worker,)) for worker in range(3)]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()

        self.assertEqual(counts, {0: 1, 1: 2, 2: 3})
        self.assertEqual(store.thread_lock_acquisitions(), 1)
        self.assertEqual(store.resize_guard.acquisitions, 7)

    def test_atomic_mode_counts_stripe_locks(self):
        store = SharedGlobalVector(SharedMode.ATOMIC)
        store.ensure_size(3)
        with store.evaluation():
            store.set(1, 2.0)
            store.add(2, 1.0)
            store.take(1)
            store.get(2)
        # exclusive + shared + three locked writes
        self.assertEqual(store.thread_lock_acquisitions(), 5)

        quiet = SharedGlobalVector(SharedMode.ATOMIC, instrumented=False)
        quiet.ensure_size(3)
        quiet.add(1, 1.0)
        self.assertEqual(quiet.thread_lock_acquisitions(), 1)


class TestFactory(unittest.TestCase):
    """Test cases for local store construction and reports."""

    def test_region_info_validation(self):
        RegionInfo(3, 8, 10)
        for bounds in ((5, 4, 10), (3, 11, 10), (-1, 2, 10)):
            with self.assertRaises(ValueError):
                RegionInfo(*bounds)

    def test_make_local_store(self):
        info = RegionInfo(40, 49, 1000)
        cost = CostModel(dense_slot_bytes=8, ordered_entry_bytes=48, hash_entry_bytes=24)
        full = make_local_store("full_vector", info, cost)
        offset = make_local_store(LocalStrategy.OFFSET_VECTOR, info, cost)
        ordered = make_local_store("ordered_map", info, cost)
        hashed = make_local_store("hash_map", info, cost)

        self.assertIsInstance(full, FullLocalVector)
        self.assertEqual(full.live_slots(), 1001)
        self.assertIsInstance(offset, OffsetLocalVector)
        self.assertEqual(offset.live_slots(), 10)
        self.assertIsInstance(ordered, OrderedMapStore)
        self.assertEqual(ordered.slot_bytes, 48)
        self.assertIsInstance(hashed, HashMapStore)
        self.assertEqual(hashed.live_slots(), 0)
        with self.assertRaises(ValueError):
            make_local_store("shared_global", info)

    def test_reports_add_and_export(self):
        first = StoreMemoryReport("hash_map", 3, 5, 120, 6, 40)
        second = StoreMemoryReport("hash_map", 1, 2, 48, 3, 10)
        total = first + second
        self.assertEqual(total, StoreMemoryReport("hash_map", 4, 7, 168, 9, 50))

        text = write_memory_reports_csv([first, second])
        lines = text.strip().splitlines()
        self.assertEqual(lines[0].split(','), MEMORY_REPORT_COLUMNS)
        self.assertEqual(len(lines), 3)
        np.testing.assert_array_equal([int(v) for v in lines[1].split(',')[1:]], [3, 5, 120, 6, 40])


if __name__ == '__main__':
    unittest.main()
