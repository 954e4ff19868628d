"""
Self-checks run by the verify command.

Every check returns a CheckResult; failures and unexpected exceptions are
reported in the result, never raised.
"""

from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from adjoint_stores import CostModel, FullLocalVector, HashMapStore
from engine_settings import EngineConfig, get_engine_config
from monitoring.logging_config import get_logger, log_check_result
from parallel_harness import (
    LOCAL_STORES, SHARED_STORE, central_difference, enumerate_interleavings, generate_workload,
    gradients_close, random_program, run_simultaneous, serial_reference,
)
from preaccumulation import PREACC_STRATEGIES, PreaccumulationHelper, Strategy, SweepMode, compute_jacobian
from tape_core import ActiveValue, evaluate_reverse

from bench_cli.sweep import SweepConfig

logger = get_logger("Verify")

PROGRAM_COUNT = 10
MAX_PROGRAM_CHAIN = 40
FD_RTOL = 1e-6
PREACC_RTOL = 1e-12
FORWARD_REVERSE_RTOL = 1e-10
SHRINK_CHAIN = 50
DETERMINISM_RUNS = 20
UNARY_MIX = {"sin": 1.0, "cos": 1.0, "exp": 1.0, "log": 1.0}


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self):
        return {'check': self.name, 'result': 'PASS' if self.passed else 'FAIL', 'detail': self.detail}


def _program_inputs(engine: EngineConfig, seed: int, size: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(engine.harness.input_low, engine.harness.input_high, size=size)


def _programs(config: SweepConfig, engine: EngineConfig):
    spec = config.workload
    chain = min(spec.chain_length, MAX_PROGRAM_CHAIN)
    for k in range(PROGRAM_COUNT):
        seed = spec.seed + k
        program = random_program(seed, n_raw=2, n_inputs=spec.n_inputs, m_outputs=min(spec.m_outputs, chain),
                                 chain_length=chain, harness=engine.harness)
        yield seed, program, _program_inputs(engine, seed, program.n_raw)


def check_strategy_agreement(config: SweepConfig, engine: EngineConfig) -> CheckResult:
    """Every preaccumulation strategy reproduces the reference Jacobians bit for bit."""
    workload = generate_workload(config.workload, engine.harness)
    reference = serial_reference(workload, config=engine)
    differing = []
    for strategy in PREACC_STRATEGIES:
        blocks = serial_reference(workload, strategy, engine)
        for expected, actual in zip(reference, blocks):
            if not all(a.equals(e) for a, e in zip(actual, expected)):
                differing.append(strategy.value)
                break
    if differing:
        return CheckResult("strategy-agreement", False, "differs: " + ", ".join(differing))
    return CheckResult("strategy-agreement", True, f"{len(PREACC_STRATEGIES)} strategies bit-identical")


def check_gradient(config: SweepConfig, engine: EngineConfig) -> CheckResult:
    """Reverse gradients match finite differences, with and without preaccumulation."""
    failures = []
    for seed, program, x in _programs(config, engine):
        plain = program.gradient(x)
        if not gradients_close(plain, central_difference(program.value, x), FD_RTOL):
            failures.append(f"seed {seed}: finite differences")
            continue
        for strategy in PREACC_STRATEGIES:
            if not gradients_close(program.gradient(x, strategy), plain, PREACC_RTOL):
                failures.append(f"seed {seed}: {strategy.value}")
    if failures:
        return CheckResult("gradient", False, "; ".join(failures[:5]))
    return CheckResult("gradient", True, f"{PROGRAM_COUNT} programs")


def check_forward_reverse(config: SweepConfig, engine: EngineConfig) -> CheckResult:
    workload = generate_workload(config.workload, engine.harness)
    entry_bytes = CostModel.from_config(engine.cost_model).hash_entry_bytes
    compared = 0
    for plan in workload.plans:
        for region in plan.regions:
            forward = compute_jacobian(region, HashMapStore(entry_bytes, instrumented=False), SweepMode.FORWARD)
            reverse = compute_jacobian(region, HashMapStore(entry_bytes, instrumented=False), SweepMode.REVERSE)
            if forward.inputs != reverse.inputs or forward.outputs != reverse.outputs:
                return CheckResult("forward-reverse", False, f"worker {plan.worker}: identifier labels differ")
            if not gradients_close(forward.entries, reverse.entries, FORWARD_REVERSE_RTOL):
                return CheckResult("forward-reverse", False, f"worker {plan.worker}: entries differ")
            compared += 1
    return CheckResult("forward-reverse", True, f"{compared} regions")


def check_adjoint_reset(config: SweepConfig, engine: EngineConfig) -> CheckResult:
    """
    Two reverse sweeps of one tape on the same store agree when only the
    input adjoints are cleared in between. Stale intermediate adjoints
    (left behind when the lhs is not reset) change the second gradient.
    """
    informative = 0
    for seed, program, x in _programs(config, engine):
        tape, raw, result, _ = program.record(x)
        if not isinstance(result, ActiveValue) or not result.is_active:
            continue
        store = FullLocalVector(tape.counter.current, instrumented=False)
        gradients = []
        for _ in range(2):
            for value in raw:
                store.set(value.id, 0.0)
            store.set(result.id, 1.0)
            evaluate_reverse(tape, None, None, store)
            gradients.append(np.array([store.get(value.id) for value in raw]))
        if not np.any(gradients[0]):
            continue
        informative += 1
        if not np.array_equal(gradients[0], gradients[1]):
            return CheckResult("adjoint-reset", False, f"seed {seed}: repeated evaluation differs")
    if informative == 0:
        return CheckResult("adjoint-reset", False, "no program with a nonzero gradient")
    return CheckResult("adjoint-reset", True, f"{informative} programs")


def check_tape_shrinkage(config: SweepConfig, engine: EngineConfig) -> CheckResult:
    """A unary chain collapses to a single one-argument statement."""
    spec = config.workload.replace(workers=1, regions_per_worker=1, chain_length=SHRINK_CHAIN,
                                   n_inputs=1, m_outputs=1, shared_inputs=0, op_mix=dict(UNARY_MIX),
                                   padding_statements=0)
    workload = generate_workload(spec, engine.harness)
    plan = workload.plans[0]
    helper = PreaccumulationHelper(plan.tape, config=engine.preaccumulation, instrumented=False)
    helper.finish(plan.regions[0], Strategy.HASH_MAP)
    stats = helper.stats
    detail = (f"{stats.statements_removed} -> {stats.statements_emitted} statements, "
              f"{stats.arguments_removed} -> {stats.arguments_emitted} arguments")
    passed = (stats.statements_removed == SHRINK_CHAIN and stats.arguments_removed == SHRINK_CHAIN
              and stats.statements_emitted == 1 and stats.arguments_emitted == 1)
    return CheckResult("tape-shrinkage", passed, detail)


def check_determinism(config: SweepConfig, engine: EngineConfig) -> CheckResult:
    """Repeated simultaneous runs with local stores always match the serial reference."""
    spec = config.workload.replace(workers=max(config.T_values))
    workload = generate_workload(spec, engine.harness)
    reference = serial_reference(workload, config=engine)
    runs = DETERMINISM_RUNS
    for name in LOCAL_STORES:
        for run in range(runs):
            result = run_simultaneous(workload.fork(), name, reference=reference, config=engine)
            if not result.ok:
                problems = result.errors + result.mismatches
                return CheckResult("determinism", False, f"{name} run {run}: {problems[0]}")
    return CheckResult("determinism", True, f"{len(LOCAL_STORES)} strategies x {runs} runs at T={spec.workers}")


def check_race_simulator(config: SweepConfig, engine: EngineConfig) -> CheckResult:
    shared = enumerate_interleavings(SHARED_STORE)
    contaminated = sum(trace.contaminated for trace in shared)
    if contaminated == 0:
        return CheckResult("race-simulator", False, "no contaminated interleaving under shared storage")
    for name in LOCAL_STORES:
        if any(trace.contaminated for trace in enumerate_interleavings(name)):
            return CheckResult("race-simulator", False, f"{name} contaminated")
    return CheckResult("race-simulator", True,
                       f"shared: {contaminated} of {len(shared)} interleavings contaminated; local: none")


def check_lock_accounting(config: SweepConfig, engine: EngineConfig) -> CheckResult:
    workload = generate_workload(config.workload, engine.harness)
    regions = sum(len(plan.regions) for plan in workload.plans)
    shared = run_simultaneous(workload.fork(), Strategy.SHARED_GLOBAL_ATOMIC, check_reference=False, config=engine)
    if shared.lock_acquisitions < regions:
        return CheckResult("lock-accounting", False,
                           f"shared: {shared.lock_acquisitions} acquisitions for {regions} regions")
    for name in LOCAL_STORES:
        local = run_simultaneous(workload.fork(), name, check_reference=False, config=engine)
        if local.lock_acquisitions != 0:
            return CheckResult("lock-accounting", False, f"{name}: {local.lock_acquisitions} acquisitions")
    return CheckResult("lock-accounting", True, f"shared: {shared.lock_acquisitions}; local: 0")


CHECKS: List[Callable[[SweepConfig, EngineConfig], CheckResult]] = [
    check_strategy_agreement,
    check_gradient,
    check_forward_reverse,
    check_adjoint_reset,
    check_tape_shrinkage,
    check_determinism,
    check_race_simulator,
    check_lock_accounting,
]

CHECK_NAMES = [
    "strategy-agreement", "gradient", "forward-reverse", "adjoint-reset",
    "tape-shrinkage", "determinism", "race-simulator", "lock-accounting",
]


def run_checks(config: SweepConfig, engine: Optional[EngineConfig] = None) -> List[CheckResult]:
    engine = engine or get_engine_config()
    results = []
    for name, check in zip(CHECK_NAMES, CHECKS):
        try:
            result = check(config, engine)
        except Exception as e:
            logger.exception(f"Check {name} raised")
            result = CheckResult(name, False, f"{type(e).__name__}: {e}")
        log_check_result(result.name, result.passed, result.detail)
        results.append(result)
    return results
