"""
Per-worker preaccumulation driver: begins regions and finishes them with one
of the adjoint storage strategies, replacing each region's recording with its
Jacobian.
"""

import time
from dataclasses import dataclass, asdict
from enum import Enum
from typing import Any, Dict, Optional

from adjoint_stores import (
    CostModel, FullLocalVector, LocalStrategy, OffsetLocalVector, RegionInfo,
    SharedGlobalVector, SharedMode, StoreMemoryReport, make_local_store,
)
from engine_settings import PreaccumulationConfig
from monitoring.logging_config import get_logger, log_region_finished
from preaccumulation.jacobian import SweepMode, build_replacement, compute_jacobian
from preaccumulation.region import JacobianBlock, PreaccRegion, RegionError, begin_region, validate_region
from preaccumulation.remap import MapKind, remap_and_edit
from tape_core import Tape, TapePosition, scan_identifiers


class Strategy(Enum):
    SHARED_GLOBAL = "shared_global"
    SHARED_GLOBAL_ATOMIC = "shared_global_atomic"
    FULL_VECTOR = "full_vector"
    OFFSET_VECTOR = "offset_vector"
    ORDERED_MAP = "ordered_map"
    HASH_MAP = "hash_map"
    REMAP_ORDERED = "remap_ordered"
    REMAP_HASHED = "remap_hashed"
    NO_PREACC = "no_preacc"

    @property
    def is_shared(self) -> bool:
        return self in (Strategy.SHARED_GLOBAL, Strategy.SHARED_GLOBAL_ATOMIC)

    @property
    def is_remap(self) -> bool:
        return self in (Strategy.REMAP_ORDERED, Strategy.REMAP_HASHED)

    @property
    def shared_mode(self) -> Optional[SharedMode]:
        if self is Strategy.SHARED_GLOBAL:
            return SharedMode.PLAIN
        if self is Strategy.SHARED_GLOBAL_ATOMIC:
            return SharedMode.ATOMIC
        return None


PREACC_STRATEGIES = [strategy for strategy in Strategy if strategy is not Strategy.NO_PREACC]


@dataclass
class PreaccStats:
    """Per-worker totals over all finished regions."""
    strategy: str = ""
    regions_finished: int = 0
    statements_removed: int = 0
    statements_emitted: int = 0
    arguments_removed: int = 0
    arguments_emitted: int = 0
    store_accesses: int = 0
    map_ops: int = 0
    allocation_events: int = 0
    lock_acquisitions: int = 0
    live_slots: int = 0
    peak_slots: int = 0
    peak_modeled_bytes: int = 0
    preacc_ns: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def memory_report(self) -> StoreMemoryReport:
        return StoreMemoryReport(
            strategy=self.strategy,
            live_slots=self.live_slots,
            peak_slots=self.peak_slots,
            modeled_bytes=self.peak_modeled_bytes,
            allocation_events=self.allocation_events,
            access_count=self.store_accesses,
        )


class PreaccumulationHelper:
    """
    Drives preaccumulation on one worker's tape.

    Keeps the worker's persistent full local vector and, when configured, map
    stores that are cleared and reused between regions. Shared strategies need
    the SharedGlobalVector all workers use.
    """

    def __init__(self, tape: Tape, shared_store: Optional[SharedGlobalVector] = None,
                 config: Optional[PreaccumulationConfig] = None,
                 cost_model: Optional[CostModel] = None,
                 instrumented: bool = True, worker: Optional[int] = None):
        self.tape = tape
        self.shared_store = shared_store
        self.config = config or PreaccumulationConfig()
        self.cost_model = cost_model or CostModel()
        self.instrumented = instrumented
        self.worker = tape.owner if worker is None else worker
        self.logger = get_logger("PreaccumulationHelper")

        self.full_vector: Optional[FullLocalVector] = None
        self._map_pool: Dict[LocalStrategy, Any] = {}
        self.stats = PreaccStats()

    # ------------------------------------------------------------------ regions

    def begin(self) -> PreaccRegion:
        """Open a region at the current tape position. Regions do not nest."""
        return begin_region(self.tape)

    def finish(self, region: PreaccRegion, strategy, mode=None, validate: Optional[bool] = None) -> JacobianBlock:
        """
        Preaccumulate the region with the given strategy and splice its
        Jacobian into the tape in place of the recording.
        """
        strategy = Strategy(strategy)
        if region.tape is not self.tape:
            raise RegionError("Region belongs to another worker's tape")
        if region.finished:
            raise RegionError("Region already finished")
        if not region.closed:
            region.close()

        if validate if validate is not None else self.config.validate_regions:
            violations = validate_region(region)
            if violations:
                raise RegionError("Region violates connectivity: " + "; ".join(str(v) for v in violations))

        mode = SweepMode(mode if mode is not None else self.config.mode)
        self.stats.strategy = strategy.value
        started = time.perf_counter_ns()

        if strategy.is_shared:
            jacobian = self._finish_shared(region, strategy, mode)
        elif strategy.is_remap:
            jacobian = self._finish_remap(region, strategy, mode)
        elif strategy is Strategy.NO_PREACC:
            jacobian = self._finish_local(region, LocalStrategy.HASH_MAP, mode)
        else:
            jacobian = self._finish_local(region, LocalStrategy(strategy.value), mode)

        if strategy is Strategy.NO_PREACC:
            removed = emitted = 0
        else:
            removed, emitted = self._replace(region, jacobian)

        region.finished = True
        self.tape.unmark_region(region)
        self.stats.preacc_ns += time.perf_counter_ns() - started
        self.stats.regions_finished += 1
        log_region_finished(self.worker, strategy.value, removed, emitted)
        return jacobian

    # ------------------------------------------------------------------ strategies

    def _finish_shared(self, region: PreaccRegion, strategy: Strategy, mode: SweepMode) -> JacobianBlock:
        store = self.shared_store
        if store is None:
            raise RegionError(f"Strategy {strategy.value} needs a shared adjoint vector")
        if store.mode is not strategy.shared_mode:
            raise RegionError(f"Strategy {strategy.value} needs a {strategy.shared_mode.value} shared vector, "
                              f"got {store.mode.value}")

        locks_before = store.thread_lock_acquisitions()
        store.ensure_size(self.tape.counter.current)
        with store.evaluation():
            jacobian = compute_jacobian(region, store, mode)
        self.stats.lock_acquisitions += store.thread_lock_acquisitions() - locks_before
        return jacobian

    def _local_store(self, region: PreaccRegion, local: LocalStrategy):
        i_max = self.tape.counter.current

        if local is LocalStrategy.FULL_VECTOR:
            if self.full_vector is None:
                self.full_vector = FullLocalVector(i_max, self.cost_model.dense_slot_bytes, self.instrumented)
            else:
                self.full_vector.ensure_size(i_max)
            return self.full_vector

        if local is LocalStrategy.OFFSET_VECTOR:
            scan = scan_identifiers(self.tape, region.start, region.end, region.inputs + region.outputs)
            return make_local_store(local, RegionInfo(scan.min_id, scan.max_id, i_max),
                                    self.cost_model, self.instrumented)

        if self.config.reuse_map_stores and local in self._map_pool:
            store = self._map_pool[local]
            store.clear()
            return store

        # Map stores ignore the region bounds
        store = make_local_store(local, RegionInfo(0, i_max, i_max), self.cost_model, self.instrumented)
        if self.config.reuse_map_stores:
            self._map_pool[local] = store
        return store

    def _finish_local(self, region: PreaccRegion, local: LocalStrategy, mode: SweepMode) -> JacobianBlock:
        store = self._local_store(region, local)
        before = _snapshot(store)
        jacobian = compute_jacobian(region, store, mode)
        self._account(store, before)
        return jacobian

    def _finish_remap(self, region: PreaccRegion, strategy: Strategy, mode: SweepMode) -> JacobianBlock:
        kind = MapKind.ORDERED if strategy is Strategy.REMAP_ORDERED else MapKind.HASHED
        remap = remap_and_edit(region, kind)
        distinct = remap.size
        self.stats.map_ops += remap.map_ops
        del remap

        store = OffsetLocalVector(0, distinct, self.cost_model.dense_slot_bytes, self.instrumented)
        before = _snapshot(store)
        jacobian = compute_jacobian(region, store, mode)
        self._account(store, before)
        return jacobian

    def _account(self, store, before):
        counters = store.counters
        reads, writes, map_ops, allocations = before
        stats = self.stats
        stats.store_accesses += counters.reads + counters.writes - reads - writes
        stats.map_ops += counters.map_ops - map_ops
        stats.allocation_events += counters.allocation_events - allocations

        report = store.memory_report()
        stats.live_slots = report.live_slots
        if report.peak_slots > stats.peak_slots:
            stats.peak_slots = report.peak_slots
        if report.modeled_bytes > stats.peak_modeled_bytes:
            stats.peak_modeled_bytes = report.modeled_bytes

    # ------------------------------------------------------------------ tape editing

    def _replace(self, region: PreaccRegion, jacobian: JacobianBlock):
        statements, renamed = build_replacement(jacobian, self.tape.counter)
        removed = len(region)
        arguments_removed = self.tape.argument_count(region.start, region.end)

        # Unmark first so an empty region is not shifted by its own splice
        self.tape.unmark_region(region)
        self.tape.replace_range(region.start, region.end, statements)
        region.end = TapePosition(region.start.index + len(statements))

        for position, new_id in renamed:
            region.outputs[position] = new_id
            value = region.output_values[position]
            if value is not None:
                value.id = new_id

        emitted = len(statements)
        stats = self.stats
        stats.statements_removed += removed
        stats.statements_emitted += emitted
        stats.arguments_removed += arguments_removed
        stats.arguments_emitted += sum(statement.arity for statement in statements)
        return removed, emitted


def _snapshot(store):
    counters = store.counters
    return counters.reads, counters.writes, counters.map_ops, counters.allocation_events
