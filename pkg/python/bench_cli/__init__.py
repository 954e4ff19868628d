"""Command-line surface: self-checks, benchmark sweeps and the race demo."""

from bench_cli.sweep import BENCH_COLUMNS, SweepConfig, load_sweep_config
from bench_cli.checks import CHECK_NAMES, CheckResult, run_checks
from bench_cli.commands import bench_rows, cmd_bench, cmd_race_demo, cmd_verify
from bench_cli.main import build_parser, main

__all__ = [
    "BENCH_COLUMNS", "SweepConfig", "load_sweep_config",
    "CHECK_NAMES", "CheckResult", "run_checks",
    "bench_rows", "cmd_bench", "cmd_race_demo", "cmd_verify",
    "build_parser", "main",
]
