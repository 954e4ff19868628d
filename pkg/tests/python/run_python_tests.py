#!/usr/bin/env python3
"""
Test runner for the preaccumulation benchmark.

Runs each test module as its own suite, bottom-up through the package stack,
and prints a per-module table followed by an overall summary.

    python tests/python/run_python_tests.py                 # all modules
    python tests/python/run_python_tests.py tape_core race  # name filters
"""

import importlib
import os
import sys
import time
import unittest
from datetime import datetime

# Add the python directory to the path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', '..', 'python'))
sys.path.append(os.path.dirname(__file__))

# Bottom-up through the package stack
TEST_MODULES = [
    'test_engine_settings',
    'test_tape_core',
    'test_adjoint_stores',
    'test_preaccumulation',
    'test_parallel_harness',
    'test_race_simulation',
    'test_bench_cli',
]

# import name -> requirements.txt name
REQUIRED_PACKAGES = {
    'numpy': 'numpy',
    'pandas': 'pandas',
    'yaml': 'pyyaml',
    'colorlog': 'colorlog',
    'psutil': 'psutil',
    'sortedcontainers': 'sortedcontainers',
}


def check_dependencies():
    """Return the requirement names of packages that fail to import."""
    print("🔍 Checking Python Dependencies...")
    missing = []
    for module, requirement in REQUIRED_PACKAGES.items():
        try:
            importlib.import_module(module)
            print(f"  {requirement}")
        except ImportError:
            print(f"  {requirement} - MISSING")
            missing.append(requirement)
    return missing


def selected_modules(filters):
    if not filters:
        return list(TEST_MODULES)
    return [name for name in TEST_MODULES if any(token in name for token in filters)]


def run_module(name):
    """Run one test module; returns (result, seconds)."""
    suite = unittest.defaultTestLoader.loadTestsFromName(name)
    runner = unittest.TextTestRunner(verbosity=1, stream=sys.stdout)
    started = time.perf_counter()
    result = runner.run(suite)
    return result, time.perf_counter() - started


def print_summary(outcomes):
    """Per-module table plus failing test names; True when everything passed."""
    print("\n" + "=" * 60)
    print("TEST RESULTS BY MODULE")
    print("=" * 60)
    print(f"{'module':<26}{'tests':>7}{'failed':>8}{'errors':>8}{'seconds':>10}")

    total = failed = errored = 0
    for name, result, seconds in outcomes:
        total += result.testsRun
        failed += len(result.failures)
        errored += len(result.errors)
        print(f"{name:<26}{result.testsRun:>7}{len(result.failures):>8}{len(result.errors):>8}{seconds:>10.2f}")

    for name, result, _ in outcomes:
        for test, _ in result.failures + result.errors:
            print(f"  • {name}: {test.id().split('.', 1)[-1]}")

    print("=" * 60)
    print(f"Total: {total}  Passed: {total - failed - errored}  Failures: {failed}  Errors: {errored}")
    return failed == 0 and errored == 0


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    print(f"Preaccumulation Benchmark Tests - {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")

    missing = check_dependencies()
    if missing:
        print(f"\nMissing packages: {', '.join(missing)}")
        print(f"pip install {' '.join(missing)}")
        return 1

    modules = selected_modules(argv)
    if not modules:
        print(f"No test module matches {argv}")
        return 1

    outcomes = []
    for name in modules:
        print(f"\n--- {name}")
        result, seconds = run_module(name)
        outcomes.append((name, result, seconds))

    if print_summary(outcomes):
        print("\nALL TESTS PASSED")
        print("Next: python run_bench.py verify --config config/sweep_config.json")
        return 0
    print("\nSOME TESTS FAILED")
    return 1


if __name__ == '__main__':
    sys.exit(main())
