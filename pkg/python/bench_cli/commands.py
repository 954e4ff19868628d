"""
verify, bench and race-demo commands. Each returns a process exit code.
"""

import sys
from pathlib import Path
from typing import Optional

import pandas as pd

from engine_settings import EngineConfig, get_engine_config
from monitoring.logging_config import get_logger, log_error, log_warning
from parallel_harness import SHARED_STORE, enumerate_interleavings, measure, simulate_race
from preaccumulation import SweepMode

from bench_cli.checks import run_checks
from bench_cli.sweep import BENCH_COLUMNS, SweepConfig

logger = get_logger("BenchCLI")

DEMO_LOCAL_STORE = "hash_map"


def cmd_verify(config: SweepConfig, engine: Optional[EngineConfig] = None) -> int:
    results = run_checks(config, engine)
    table = pd.DataFrame([result.to_dict() for result in results], columns=['check', 'result', 'detail'])
    print(table.to_string(index=False))

    failed = [result.name for result in results if not result.passed]
    if failed:
        print(f"FAILED: {', '.join(failed)}")
        return 1
    print(f"All {len(results)} checks passed")
    return 0


def bench_rows(config: SweepConfig, engine: Optional[EngineConfig] = None) -> pd.DataFrame:
    """One row per (strategy, T), strategy-major."""
    engine = engine or get_engine_config()
    spec = config.workload
    rows = []
    for strategy in config.strategies:
        for workers in config.T_values:
            result = measure(spec.replace(workers=int(workers)), strategy, config.repetitions, engine)
            if not result.ok:
                log_warning(f"{strategy} at T={workers}: " + "; ".join(result.errors + result.mismatches))
            row = result.to_dict()
            row.update({
                'L': spec.chain_length,
                'n': spec.n_inputs,
                'm': spec.m_outputs,
                's': spec.shared_inputs,
                'padding': spec.padding_statements,
            })
            rows.append(row)
    return pd.DataFrame(rows, columns=BENCH_COLUMNS)


def cmd_bench(config: SweepConfig, out=None, engine: Optional[EngineConfig] = None) -> int:
    path = Path(out or config.output_path)
    frame = bench_rows(config, engine)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False)
    except OSError as e:
        log_error(f"Could not write bench results to {path}: {e}", "IO")
        print(f"error: could not write {path}: {e}", file=sys.stderr)
        return 1
    logger.info(f"Wrote {len(frame)} rows to {path}")
    print(frame[['strategy', 'T', 'preacc_time_ns', 'modeled_bytes', 'lock_acquisitions']].to_string(index=False))
    return 0


def _verdict(contaminated: bool) -> str:
    return "contaminated" if contaminated else "correct"


def cmd_race_demo(seed: int = 0, enumerate_all: bool = False, mode: str = "reverse") -> int:
    sweep = SweepMode(mode)
    if sweep is SweepMode.AUTO:
        sweep = SweepMode.REVERSE
    modes = [sweep, sweep]

    shared = simulate_race(seed, SHARED_STORE, modes=modes)
    local = simulate_race(seed, DEMO_LOCAL_STORE, modes=modes)

    print(f"shared adjoint vector, seed {seed}:")
    for line in shared.log:
        print(f"  {line}")
    print(f"local {DEMO_LOCAL_STORE} stores, seed {seed}:")
    for line in local.log:
        print(f"  {line}")

    if enumerate_all:
        for name, traces in ((SHARED_STORE, enumerate_interleavings(SHARED_STORE, modes=modes)),
                             (DEMO_LOCAL_STORE, enumerate_interleavings(DEMO_LOCAL_STORE, modes=modes))):
            bad = sum(trace.contaminated for trace in traces)
            print(f"{name}: {bad} of {len(traces)} interleavings contaminated")

    symbol = "u̅" if sweep is SweepMode.REVERSE else "ẏ"
    harvested = ", ".join(f"{value:.1f}" for value in local.harvested)
    print(f"shared: {symbol} = {shared.observed:.1f} ({_verdict(shared.contaminated)}); "
          f"local: ({harvested}) ({_verdict(local.contaminated)})")
    return 0
