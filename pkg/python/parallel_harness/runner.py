"""
Simultaneous preaccumulation of a recorded workload on T worker threads,
followed by one reverse evaluation per worker tape.
"""

import queue
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from adjoint_stores import (
    CostModel, OffsetLocalVector, SharedGlobalVector, StoreMemoryReport,
)
from engine_settings import EngineConfig, get_engine_config
from monitoring.logging_config import get_logger, log_error, log_warning
from monitoring.performance_tracker import PerformanceTracker
from parallel_harness.workload import Workload, WorkerPlan, WorkloadSpec, generate_workload
from preaccumulation import JacobianBlock, PreaccStats, PreaccumulationHelper, Strategy
from tape_core import evaluate_reverse, scan_identifiers

logger = get_logger("HarnessRunner")


@dataclass
class WorkerOutcome:
    """What one worker hands back through the result queue."""
    worker: int
    jacobians: List[JacobianBlock]
    stats: PreaccStats
    gradients: Dict[int, float]
    eval_ns: int = 0
    error: Optional[str] = None


@dataclass
class TimingSummary:
    """Mean and spread of one timing over repeated runs."""
    mean_ns: int
    min_ns: int
    max_ns: int
    samples: int

    @classmethod
    def from_samples(cls, samples: List[int]) -> 'TimingSummary':
        values = np.asarray(samples, dtype=np.int64)
        return cls(int(round(float(values.mean()))), int(values.min()), int(values.max()), len(samples))


@dataclass
class HarnessResult:
    """Jacobians, memory, timings and exact counters of one (aggregated) run."""
    strategy: str
    workers: int
    jacobians: List[List[JacobianBlock]]
    memory_reports: List[StoreMemoryReport]
    shared_report: Optional[StoreMemoryReport]
    record_ns: int
    preacc_ns: int
    eval_ns: int
    map_ops: int
    adjoint_accesses: int
    allocation_events: int
    lock_acquisitions: int
    statements_before: int
    statements_after: int
    gradients: Dict[int, float]
    rss_bytes: int = 0
    mismatches: List[str] = field(default_factory=list)
    errors: List[str] = field(default_factory=list)
    timings: Dict[str, TimingSummary] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.mismatches and not self.errors

    @property
    def cumulative_memory(self) -> StoreMemoryReport:
        """Summed local stores of all workers, plus the shared vector if one was used."""
        total = StoreMemoryReport.empty(self.strategy)
        for report in self.memory_reports:
            total = total + report
        if self.shared_report is not None:
            total = total + self.shared_report
        return StoreMemoryReport(self.strategy, total.live_slots, total.peak_slots, total.modeled_bytes,
                                 total.allocation_events, total.access_count)

    def jacobians_equal(self, other: 'HarnessResult') -> bool:
        return _compare(self.jacobians, other.jacobians) == []

    def to_dict(self) -> Dict[str, Any]:
        memory = self.cumulative_memory
        return {
            'strategy': self.strategy,
            'T': self.workers,
            'record_time_ns': self.record_ns,
            'preacc_time_ns': self.preacc_ns,
            'eval_time_ns': self.eval_ns,
            'live_slots': memory.live_slots,
            'peak_slots': memory.peak_slots,
            'modeled_bytes': memory.modeled_bytes,
            'allocation_events': self.allocation_events,
            'map_ops': self.map_ops,
            'adjoint_accesses': self.adjoint_accesses,
            'lock_acquisitions': self.lock_acquisitions,
        }


def _compare(jacobians: List[List[JacobianBlock]], reference: List[List[JacobianBlock]]) -> List[str]:
    mismatches = []
    for worker, (blocks, expected) in enumerate(zip(jacobians, reference)):
        for index, (block, wanted) in enumerate(zip(blocks, expected)):
            if not block.equals(wanted):
                mismatches.append(f"worker {worker} region {index}: Jacobian differs from serial reference")
    return mismatches


def _finish_regions(helper: PreaccumulationHelper, plan: WorkerPlan, strategy: Strategy) -> List[JacobianBlock]:
    # Later regions first, so earlier regions keep their positions until they are finished
    jacobians: List[Optional[JacobianBlock]] = [None] * len(plan.regions)
    for index in range(len(plan.regions) - 1, -1, -1):
        jacobians[index] = helper.finish(plan.regions[index], strategy)
    return jacobians


def evaluate_gradients(plan: WorkerPlan) -> Dict[int, float]:
    """
    Reverse evaluation of the worker's tape from its evaluation start with a
    unit seed on every region output. Returns adjoints of the region inputs.
    """
    tape = plan.tape
    outputs = [identifier for region in plan.regions for identifier in region.outputs]
    inputs = list(dict.fromkeys(identifier for region in plan.regions for identifier in region.inputs))
    scan = scan_identifiers(tape, plan.eval_start, tape.position, inputs + outputs)
    adjoints = OffsetLocalVector(scan.min_id, scan.max_id, instrumented=False)

    for identifier in outputs:
        adjoints.add(identifier, 1.0)
    evaluate_reverse(tape, plan.eval_start, tape.position, adjoints)
    return {identifier: adjoints.get(identifier) for identifier in inputs}


def serial_reference(workload: Workload, strategy=None, config: Optional[EngineConfig] = None) -> List[List[JacobianBlock]]:
    """Finish all regions of a forked workload one worker after another on the calling thread."""
    config = config or get_engine_config()
    strategy = Strategy(strategy or config.harness.reference_strategy)
    forked = workload.fork()
    cost_model = CostModel.from_config(config.cost_model)
    shared = SharedGlobalVector(strategy.shared_mode, cost_model.dense_slot_bytes) if strategy.is_shared else None

    reference = []
    for plan in forked.plans:
        helper = PreaccumulationHelper(plan.tape, shared, config.preaccumulation, cost_model, instrumented=False)
        reference.append(_finish_regions(helper, plan, strategy))
    return reference


def run_simultaneous(workload: Workload, strategy, reference: Optional[List[List[JacobianBlock]]] = None,
                     check_reference: bool = True, instrumented: bool = True,
                     config: Optional[EngineConfig] = None) -> HarnessResult:
    """
    Finish every worker's regions on its own thread, then evaluate each tape.

    The workload is consumed (its tapes are edited); fork it to keep a copy.
    Jacobians that differ from the serial reference are reported in
    mismatches, never raised.
    """
    config = config or get_engine_config()
    strategy = Strategy(strategy)
    cost_model = CostModel.from_config(config.cost_model)
    if check_reference and reference is None:
        reference = serial_reference(workload, config=config)

    shared = None
    if strategy.is_shared:
        shared = SharedGlobalVector(strategy.shared_mode, cost_model.dense_slot_bytes, instrumented)

    workers = len(workload.plans)
    statements_before = sum(len(plan.tape) for plan in workload.plans)
    tracker = PerformanceTracker()
    results: "queue.Queue[WorkerOutcome]" = queue.Queue()
    start_barrier = threading.Barrier(workers + 1)
    preacc_barrier = threading.Barrier(workers + 1)

    def worker_main(plan: WorkerPlan):
        helper = PreaccumulationHelper(plan.tape, shared, config.preaccumulation, cost_model,
                                       instrumented, plan.worker)
        outcome = WorkerOutcome(plan.worker, [], helper.stats, {})
        start_barrier.wait()
        try:
            outcome.jacobians = _finish_regions(helper, plan, strategy)
        except Exception as e:
            outcome.error = f"worker {plan.worker} preaccumulation: {e}"
            log_error(outcome.error, "HARNESS")
        preacc_barrier.wait()

        if outcome.error is None:
            started = time.perf_counter_ns()
            try:
                outcome.gradients = evaluate_gradients(plan)
            except Exception as e:
                outcome.error = f"worker {plan.worker} evaluation: {e}"
                log_error(outcome.error, "HARNESS")
            outcome.eval_ns = time.perf_counter_ns() - started
        results.put(outcome)

    threads = [threading.Thread(target=worker_main, args=(plan,), name=f"preacc-worker-{plan.worker}")
               for plan in workload.plans]
    for thread in threads:
        thread.start()

    start_barrier.wait()
    with tracker.phase("preacc"):
        preacc_barrier.wait()
    with tracker.phase("eval"):
        for thread in threads:
            thread.join()
    preacc_ns = tracker.get_phase_ns("preacc")
    eval_ns = tracker.get_phase_ns("eval")
    rss = tracker.sample_memory()

    outcomes = sorted((results.get() for _ in threads), key=lambda outcome: outcome.worker)

    gradients: Dict[int, float] = {}
    for outcome in outcomes:
        for identifier, value in outcome.gradients.items():
            gradients[identifier] = gradients.get(identifier, 0.0) + value

    stats = [outcome.stats for outcome in outcomes]
    shared_report = shared.memory_report() if shared is not None else None
    shared_accesses = shared.counters.access_count if shared is not None else 0
    shared_allocations = shared.counters.allocation_events if shared is not None else 0

    result = HarnessResult(
        strategy=strategy.value,
        workers=workers,
        jacobians=[outcome.jacobians for outcome in outcomes],
        memory_reports=[stat.memory_report() for stat in stats],
        shared_report=shared_report,
        record_ns=workload.record_ns,
        preacc_ns=preacc_ns,
        eval_ns=eval_ns,
        map_ops=sum(stat.map_ops for stat in stats),
        adjoint_accesses=sum(stat.store_accesses for stat in stats) + shared_accesses,
        allocation_events=sum(stat.allocation_events for stat in stats) + shared_allocations,
        lock_acquisitions=sum(stat.lock_acquisitions for stat in stats),
        statements_before=statements_before,
        statements_after=sum(len(plan.tape) for plan in workload.plans),
        gradients=gradients,
        rss_bytes=rss,
        errors=[outcome.error for outcome in outcomes if outcome.error],
    )

    if check_reference and not result.errors:
        result.mismatches = _compare(result.jacobians, reference)
        if result.mismatches:
            log_warning(f"{strategy.value}: {len(result.mismatches)} region(s) differ from the serial reference")
    return result


def measure(spec: WorkloadSpec, strategy, repetitions: int = 5, config: Optional[EngineConfig] = None) -> HarnessResult:
    """
    One discarded warm-up run, `repetitions` timed runs without instrumentation
    and one instrumented run for the counters. Every run records its own workload.
    """
    if repetitions < 1:
        raise ValueError(f"repetitions must be at least 1, got {repetitions}")
    config = config or get_engine_config()
    strategy = Strategy(strategy)

    run_simultaneous(generate_workload(spec, config.harness), strategy,
                     check_reference=False, instrumented=False, config=config)

    tracker = PerformanceTracker()
    record, preacc, evaluation = [], [], []
    for _ in range(repetitions):
        timed = run_simultaneous(generate_workload(spec, config.harness), strategy,
                                 check_reference=False, instrumented=False, config=config)
        record.append(timed.record_ns)
        preacc.append(timed.preacc_ns)
        evaluation.append(timed.eval_ns)
        tracker.add("record", timed.record_ns)
        tracker.add("preacc", timed.preacc_ns)
        tracker.add("eval", timed.eval_ns)
        tracker.sample_memory()

    counted = run_simultaneous(generate_workload(spec, config.harness), strategy,
                               check_reference=True, instrumented=True, config=config)
    counted.timings = {
        'record': TimingSummary.from_samples(record),
        'preacc': TimingSummary.from_samples(preacc),
        'eval': TimingSummary.from_samples(evaluation),
    }
    counted.record_ns = counted.timings['record'].mean_ns
    counted.preacc_ns = counted.timings['preacc'].mean_ns
    counted.eval_ns = counted.timings['eval'].mean_ns
    logger.info(f"Measured {strategy.value} at T={spec.workers}: preacc mean {counted.preacc_ns} ns "
                f"[{counted.timings['preacc'].min_ns}, {counted.timings['preacc'].max_ns}]")
    logger.debug(f"Timed phases for {strategy.value}: {tracker.get_summary()}")
    return counted
