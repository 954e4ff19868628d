"""
Tests for Jacobian taping and tape evaluation.
"""

import math
import threading
import unittest
import sys
import os

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

# Add the python directory to the path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', '..', 'python'))

from adjoint_stores import FullLocalVector, HashMapStore
from tape_core import (
    ActiveValue, IdentifierCounter, RecordingError, Statement, Tape, active_tape, copy, cos,
    evaluate_forward, evaluate_reverse, exp, lhs_reset, log, register_input, reset_range,
    scan_identifiers, sin,
)


class TestIdentifierCounter(unittest.TestCase):
    """Test cases for the shared identifier source."""

    def test_strictly_increasing(self):
        counter = IdentifierCounter()
        self.assertEqual(counter.current, 0)
        self.assertEqual([counter.next() for _ in range(3)], [1, 2, 3])
        self.assertEqual(counter.current, 3)

    def test_reserve_block(self):
        counter = IdentifierCounter(10)
        block = counter.reserve(5)
        self.assertEqual(list(block), [11, 12, 13, 14, 15])
        self.assertEqual(counter.next(), 16)
        with self.assertRaises(ValueError):
            counter.reserve(-1)

    def test_threads_never_share_identifiers(self):
        """Identifiers drawn concurrently are all distinct."""
        counter = IdentifierCounter()
        drawn = [[] for _ in range(4)]

        def draw(bucket):
            for _ in range(500):
                bucket.append(counter.next())

        threads = [threading.Thread(target=draw, args=(bucket,)) for bucket in drawn]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()

        everything = [identifier for bucket in drawn for identifier in bucket]
        self.assertEqual(len(set(everything)), 2000)
        self.assertEqual(counter.current, 2000)


class TestRecording(unittest.TestCase):
    """Test cases for recording statements on a tape."""

    def setUp(self):
        self.tape = Tape()

    def test_no_active_tape(self):
        """Operations on active values need an active tape."""
        with self.assertRaises(RecordingError):
            active_tape()
        with self.assertRaises(RecordingError):
            sin(ActiveValue(1.0, 1))

    def test_binary_statement(self):
        with self.tape.recording():
            a = register_input(2.0)
            b = register_input(3.0)
            c = a * b
        self.assertEqual(c.primal, 6.0)
        self.assertEqual(len(self.tape), 3)
        self.assertEqual(self.tape.statement(2), Statement(c.id, ((3.0, a.id), (2.0, b.id))))
        self.assertEqual(self.tape.argument_count(), 2)

    def test_passive_operands_are_dropped(self):
        """Constants contribute no arguments; fully passive results record nothing."""
        with self.tape.recording():
            x = register_input(1.5)
            y = 2.0 * x + 1.0
            z = ActiveValue(4.0) * 3.0
        self.assertEqual(self.tape.statement(1).args, ((2.0, x.id),))
        self.assertEqual(self.tape.statement(2).arity, 1)
        self.assertEqual(len(self.tape), 3)
        self.assertTrue(y.is_active)
        self.assertEqual(z, 12.0)

    def test_unary_partials(self):
        with self.tape.recording():
            x = register_input(0.7)
            values = [sin(x), cos(x), exp(x), log(x), copy(x), -x]
        expected = [math.cos(0.7), -math.sin(0.7), math.exp(0.7), 1.0 / 0.7, 1.0, -1.0]
        for index, (value, partial) in enumerate(zip(values, expected), start=1):
            statement = self.tape.statement(index)
            self.assertEqual(statement.lhs, value.id)
            self.assertEqual(statement.args, ((partial, x.id),))

    def test_non_finite_partial_rejected(self):
        with self.tape.recording():
            register_input(1.0)
        with self.assertRaises(RecordingError):
            self.tape.record([(float('inf'), 1)])

    def test_failing_operations_raise_recording_error(self):
        """Overflow, domain errors and division by zero never escape as math exceptions."""
        with self.tape.recording():
            big = register_input(1000.0)
            zero = register_input(0.0)
            negative = register_input(-1.0)
            huge = register_input(1e200)
            recorded = len(self.tape)
            failing = [
                lambda: exp(big),
                lambda: log(zero),
                lambda: log(negative),
                lambda: 1.0 / zero,
                lambda: big / 0.0,
                lambda: huge * huge,
                lambda: sin(ActiveValue(float("inf"), huge.id)),
            ]
            for index, operation in enumerate(failing):
                with self.assertRaises(RecordingError, msg=str(index)):
                    operation()
        self.assertEqual(len(self.tape), recorded)

    def test_passive_operations_keep_math_semantics(self):
        with self.assertRaises(OverflowError):
            exp(1000.0)
        self.assertEqual(log(1.0), 0.0)

    def test_acyclicity(self):
        """Arguments must be assigned before the statement."""
        with self.tape.recording():
            register_input(1.0)
        with self.assertRaises(RecordingError):
            self.tape.record([(1.0, 99)])

    def test_dump_format(self):
        with self.tape.recording():
            a = register_input(1.0)
            b = register_input(2.0)
            a + b
        self.assertEqual(self.tape.dump(), "1 <-\n2 <-\n3 <- (1,1) (1,2)")

    def test_padding(self):
        """Padding statements inflate the identifier range without arguments."""
        ids = self.tape.record_padding(1000)
        self.assertEqual(len(ids), 1000)
        self.assertEqual(len(self.tape), 1000)
        self.assertEqual(self.tape.argument_count(), 0)
        self.assertEqual(self.tape.counter.current, 1000)
        self.assertGreater(self.tape.recorded_bytes(), 0)

    def test_shared_counter_across_tapes(self):
        counter = IdentifierCounter()
        first, second = Tape(0, counter), Tape(1, counter)
        with first.recording():
            a = register_input(1.0)
        with second.recording():
            b = register_input(1.0)
            c = a + b
        self.assertEqual((a.id, b.id, c.id), (1, 2, 3))
        self.assertEqual(len(first), 1)
        self.assertEqual(len(second), 2)

    def test_replace_range(self):
        with self.tape.recording():
            x = register_input(1.0)
            y = sin(cos(x))
            z = y * 2.0
        self.tape.replace_range(1, 3, [Statement(y.id, ((0.5, x.id),))])
        self.assertEqual(len(self.tape), 3)
        self.assertEqual(self.tape.statement(1), Statement(y.id, ((0.5, x.id),)))
        self.assertEqual(self.tape.statement(2), Statement(z.id, ((2.0, y.id),)))
        with self.assertRaises(IndexError):
            self.tape.replace_range(2, 5, [])


class TestEvaluation(unittest.TestCase):
    """Test cases for forward and reverse sweeps."""

    def setUp(self):
        self.tape = Tape()
        with self.tape.recording():
            self.x = register_input(0.3)
            self.y = register_input(1.7)
            t = self.x * self.y
            self.f = sin(t) + self.y / self.x

    def expected_gradient(self):
        x, y = 0.3, 1.7
        return np.array([y * math.cos(x * y) - y / x ** 2, x * math.cos(x * y) + 1.0 / x])

    def test_reverse_gradient(self):
        adjoints = FullLocalVector(self.tape.counter.current)
        adjoints.set(self.f.id, 1.0)
        evaluate_reverse(self.tape, None, None, adjoints)
        gradient = [adjoints.get(self.x.id), adjoints.get(self.y.id)]
        assert_allclose(gradient, self.expected_gradient(), rtol=1e-14)

    def test_forward_tangents(self):
        expected = self.expected_gradient()
        for index, seed in enumerate((self.x, self.y)):
            tangents = FullLocalVector(self.tape.counter.current)
            tangents.set(seed.id, 1.0)
            evaluate_forward(self.tape, None, None, tangents)
            assert_allclose(tangents.get(self.f.id), expected[index], rtol=1e-14)

    def test_reverse_access_accounting(self):
        """Each statement costs 1 + 2k accesses; inputs only read their lhs."""
        store = HashMapStore(24)
        store.set(self.f.id, 1.0)
        before = store.counters.access_count
        evaluate_reverse(self.tape, None, None, store)
        arguments = self.tape.argument_count()
        statements = len(self.tape)
        self.assertEqual(store.counters.access_count - before, statements + 2 * arguments)

    def test_forward_access_accounting(self):
        store = HashMapStore(24)
        store.set(self.x.id, 1.0)
        before = store.counters.access_count
        evaluate_forward(self.tape, None, None, store)
        self.assertEqual(store.counters.access_count - before, len(self.tape) + self.tape.argument_count())

    def test_lhs_reset(self):
        """Intermediate adjoints are zero after a sweep unless the reset is disabled."""
        adjoints = FullLocalVector(self.tape.counter.current)
        adjoints.set(self.f.id, 1.0)
        evaluate_reverse(self.tape, None, None, adjoints)
        self.assertEqual(adjoints.get(self.f.id), 0.0)

        stale = FullLocalVector(self.tape.counter.current)
        stale.set(self.f.id, 1.0)
        with lhs_reset(False):
            evaluate_reverse(self.tape, None, None, stale)
        self.assertEqual(stale.get(self.f.id), 1.0)
        assert_allclose([stale.get(self.x.id), stale.get(self.y.id)], self.expected_gradient(), rtol=1e-14)

    def test_reverse_sweep_is_linear_in_the_seed(self):
        base = FullLocalVector(self.tape.counter.current)
        base.set(self.f.id, 1.0)
        evaluate_reverse(self.tape, None, None, base)
        for alpha in (0.25, 8.0, -2.0):
            scaled = FullLocalVector(self.tape.counter.current)
            scaled.set(self.f.id, alpha)
            evaluate_reverse(self.tape, None, None, scaled)
            assert_array_equal(scaled.values(), alpha * base.values())

    def test_reset_range_and_scan(self):
        store = FullLocalVector(self.tape.counter.current)
        for identifier in range(1, self.tape.counter.current + 1):
            store.set(identifier, 3.0)
        reset_range(self.tape, 2, len(self.tape), store)
        self.assertTrue(np.all(store.values() == 0.0))

        scan = scan_identifiers(self.tape, 2, len(self.tape), [self.x.id, self.y.id])
        self.assertEqual((scan.min_id, scan.max_id), (1, self.f.id))
        self.assertEqual(scan.distinct_count, self.tape.counter.current)
        with self.assertRaises(ValueError):
            scan_identifiers(self.tape, 1, 1)


if __name__ == '__main__':
    unittest.main()
