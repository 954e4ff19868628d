"""
Tests for the verify, bench and race-demo commands.
"""

import io
import json
import tempfile
import unittest
import sys
import os
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import pandas as pd

# Add the python directory to the path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', '..', 'python'))

from bench_cli import (
    BENCH_COLUMNS, CHECK_NAMES, SweepConfig, cmd_bench, cmd_race_demo, load_sweep_config, main, run_checks,
)
from bench_cli.checks import (
    DETERMINISM_RUNS, check_adjoint_reset, check_determinism, check_lock_accounting, check_tape_shrinkage,
)
from engine_settings import EngineConfig
from parallel_harness import WorkloadSpec
from tape_core import lhs_reset


def small_config(**changes):
    config = {
        'workload': {"T": 2, "chain_length": 8, "n_inputs": 2, "m_outputs": 2, "shared_inputs": 1,
                     "seed": 3, "padding_statements": 20},
        'strategies': ["hash_map", "shared_global_atomic"],
        'T_values': [1, 2],
        'repetitions': 1,
    }
    config.update(changes)
    return SweepConfig.from_dict(config)


class TestSweepConfig(unittest.TestCase):
    """Test cases for the JSON sweep configuration."""

    def test_document(self):
        config = small_config()
        self.assertIsInstance(config.workload, WorkloadSpec)
        self.assertEqual(config.workload.workers, 2)
        data = json.loads(config.to_json())
        self.assertEqual(data['workload']['T'], 2)
        self.assertEqual(SweepConfig.from_dict(data), config)

    def test_invalid_documents(self):
        for changes in (dict(strategies=[]), dict(strategies=["fast"]), dict(T_values=[0]),
                        dict(T_values=[]), dict(repetitions=0), dict(threads=4)):
            with self.assertRaises(ValueError, msg=str(changes)):
                small_config(**changes)

    def test_bundled_config_loads(self):
        config = load_sweep_config()
        self.assertIn("no_preacc", config.strategies)
        self.assertEqual(config.T_values, [1, 2, 4, 8])

    def test_load_from_file(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "sweep.json"
            path.write_text(small_config().to_json())
            self.assertEqual(load_sweep_config(path), small_config())


class TestVerify(unittest.TestCase):
    """Test cases for the self-checks."""

    def setUp(self):
        self.config = small_config()
        self.engine = EngineConfig()

    def test_all_checks_pass(self):
        results = run_checks(self.config, self.engine)
        self.assertEqual([result.name for result in results], CHECK_NAMES)
        failed = [(result.name, result.detail) for result in results if not result.passed]
        self.assertEqual(failed, [])

    def test_adjoint_reset_detects_disabled_reset(self):
        self.assertTrue(check_adjoint_reset(self.config, self.engine).passed)
        with lhs_reset(False):
            result = check_adjoint_reset(self.config, self.engine)
        self.assertFalse(result.passed)
        self.assertEqual(result.name, "adjoint-reset")

    def test_tape_shrinkage(self):
        result = check_tape_shrinkage(self.config, self.engine)
        self.assertTrue(result.passed, result.detail)
        self.assertEqual(result.detail, "50 -> 1 statements, 50 -> 1 arguments")

    def test_lock_accounting(self):
        self.assertTrue(check_lock_accounting(self.config, self.engine).passed)

    def test_determinism_runs(self):
        result = check_determinism(self.config, self.engine)
        self.assertTrue(result.passed, result.detail)
        self.assertEqual(DETERMINISM_RUNS, 20)
        self.assertIn(f"x {DETERMINISM_RUNS} runs", result.detail)

    def test_verify_command_exit_code(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "sweep.json"
            path.write_text(self.config.to_json())
            output = io.StringIO()
            with redirect_stdout(output):
                code = main(["verify", "--config", str(path)])
        self.assertEqual(code, 0)
        self.assertIn("All 8 checks passed", output.getvalue())

    def test_invalid_config_file(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "broken.json"
            path.write_text(json.dumps({"strategies": ["warp"]}))
            with redirect_stderr(io.StringIO()):
                self.assertEqual(main(["verify", "--config", str(path)]), 2)


class TestBench(unittest.TestCase):
    """Test cases for the benchmark sweep."""

    def test_csv_rows(self):
        config = small_config()
        with tempfile.TemporaryDirectory() as directory:
            out = Path(directory) / "nested" / "bench.csv"
            with redirect_stdout(io.StringIO()):
                self.assertEqual(cmd_bench(config, out, EngineConfig()), 0)
            frame = pd.read_csv(out)

        self.assertEqual(list(frame.columns), BENCH_COLUMNS)
        self.assertEqual(list(frame['strategy']), ["hash_map", "hash_map", "shared_global_atomic",
                                                   "shared_global_atomic"])
        self.assertEqual(list(frame['T']), [1, 2, 1, 2])
        self.assertTrue((frame['L'] == 8).all())
        self.assertTrue((frame['padding'] == 20).all())
        hashed = frame[frame['strategy'] == "hash_map"]
        shared = frame[frame['strategy'] == "shared_global_atomic"]
        self.assertTrue((hashed['lock_acquisitions'] == 0).all())
        self.assertTrue((hashed['map_ops'] > 0).all())
        self.assertTrue((shared['lock_acquisitions'] >= 1).all())

    def test_unwritable_output(self):
        config = small_config(strategies=["hash_map"], T_values=[1])
        with tempfile.TemporaryDirectory() as directory:
            blocker = Path(directory) / "file"
            blocker.write_text("")
            with redirect_stdout(io.StringIO()), redirect_stderr(io.StringIO()) as errors:
                code = cmd_bench(config, blocker / "bench.csv", EngineConfig())
        self.assertEqual(code, 1)
        self.assertIn("bench.csv", errors.getvalue())


class TestRaceDemo(unittest.TestCase):
    """Test cases for the race demonstration."""

    def run_demo(self, argv):
        output = io.StringIO()
        with redirect_stdout(output):
            code = main(argv)
        return code, output.getvalue().strip().splitlines()

    def test_lockstep_summary(self):
        code, lines = self.run_demo(["race-demo"])
        self.assertEqual(code, 0)
        self.assertEqual(lines[-1], "shared: u̅ = 7.0 (contaminated); local: (2.0, 5.0) (correct)")

    def test_enumerate(self):
        code, lines = self.run_demo(["race-demo", "--enumerate"])
        self.assertEqual(code, 0)
        self.assertTrue(any(line.startswith("shared_global:") and "of 70 interleavings" in line for line in lines))
        self.assertIn("hash_map: 0 of 70 interleavings contaminated", lines)

    def test_forward_mode(self):
        output = io.StringIO()
        with redirect_stdout(output):
            self.assertEqual(cmd_race_demo(0, mode="forward"), 0)
        self.assertIn("local: (2.0, 5.0) (correct)", output.getvalue())

    def test_negative_seed(self):
        with redirect_stderr(io.StringIO()):
            self.assertEqual(main(["race-demo", "--seed", "-1"]), 2)


if __name__ == '__main__':
    unittest.main()
