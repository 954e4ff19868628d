"""
Deterministic reproduction of the shared-input data race.

Each region's preaccumulation is a generator yielding after every store step
(seed, one statement of the sweep, harvest, reset). A single-threaded
scheduler advances the generators in a given interleaving, so contamination
through a shared adjoint vector is reproducible from a seed or by exhaustive
enumeration.
"""

import copy
import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from adjoint_stores import (
    HashMapStore, LocalStrategy, OffsetLocalVector, RegionInfo, SharedGlobalVector, SharedMode,
    make_local_store,
)
from preaccumulation import (
    MapKind, PreaccRegion, SweepMode, begin_region, compute_jacobian, remap_and_edit, select_mode,
)
from tape_core import IdentifierCounter, Tape, register_input, reset_range, scan_identifiers

SHARED_STORE = "shared_global"
LOCAL_STORES = ("full_vector", "offset_vector", "ordered_map", "hash_map", "remap_ordered", "remap_hashed")


@dataclass
class RaceScenario:
    """Regions on separate tapes that share one input."""
    counter: IdentifierCounter
    tapes: List[Tape]
    regions: List[PreaccRegion]
    shared_input: int

    def fork(self) -> 'RaceScenario':
        return copy.deepcopy(self)


@dataclass
class RaceTrace:
    """Outcome of one interleaving."""
    store: str
    schedule: Tuple[int, ...]
    seed: Optional[int]
    observed: float
    harvested: Tuple[float, ...]
    expected_separate: Tuple[float, ...]
    log: List[str] = field(default_factory=list)

    @property
    def contaminated(self) -> bool:
        return self.harvested != self.expected_separate


def minimal_scenario(factors: Sequence[float] = (2.0, 5.0)) -> RaceScenario:
    """Regions y = 2*u and y = 5*u (one per factor) sharing the input u."""
    counter = IdentifierCounter()
    input_tape = Tape(0, counter)
    with input_tape.recording():
        u = register_input(1.0)

    tapes, regions = [], []
    for owner, factor in enumerate(factors, start=1):
        tape = Tape(owner, counter)
        with tape.recording():
            region = begin_region(tape)
            region.add_input(u)
            y = factor * u
            region.add_output(y)
            region.close()
        tapes.append(tape)
        regions.append(region)
    return RaceScenario(counter, tapes, regions, u.id)


def _region_steps(region: PreaccRegion, store, mode: SweepMode, log: List[str], label: str,
                  harvest_hook: Callable[[int], None]) -> Iterator[None]:
    """
    Preaccumulate one region, yielding after each store step. harvest_hook
    is called with the sweep index once the seeded sweep is complete.
    """
    tape = region.tape
    lo, hi = region.start.index, region.end.index
    inputs = list(region.sweep_inputs)
    outputs = list(region.sweep_outputs)
    declared = inputs + outputs
    lhs, arg_start, partials, rhs = tape.columns()

    if mode is SweepMode.REVERSE:
        for j, output in enumerate(outputs):
            store.set(output, 1.0)
            log.append(f"{label}: seed adjoint of {output} = 1.0")
            yield
            for index in range(hi - 1, lo - 1, -1):
                a0, a1 = arg_start[index], arg_start[index + 1]
                if a0 == a1:
                    store.get(lhs[index])
                else:
                    adjoint = store.take(lhs[index])
                    for k in range(a0, a1):
                        store.add(rhs[k], partials[k] * adjoint)
                        log.append(f"{label}: adjoint of {rhs[k]} += {partials[k]:g} * {adjoint:g} "
                                   f"-> {store.get(rhs[k]):g}")
                yield
            harvest_hook(j)
            yield
            reset_range(tape, lo, hi, store, declared)
            log.append(f"{label}: reset region adjoints")
            yield
    else:
        for i, identifier in enumerate(inputs):
            store.set(identifier, 1.0)
            log.append(f"{label}: seed tangent of {identifier} = 1.0")
            yield
            for index in range(lo, hi):
                a0, a1 = arg_start[index], arg_start[index + 1]
                if a0 == a1:
                    store.get(lhs[index])
                else:
                    total = 0.0
                    for k in range(a0, a1):
                        total += partials[k] * store.get(rhs[k])
                    store.set(lhs[index], total)
                    log.append(f"{label}: tangent of {lhs[index]} = {total:g}")
                yield
            harvest_hook(i)
            yield
            reset_range(tape, lo, hi, store, declared)
            log.append(f"{label}: reset region tangents")
            yield


def _stores_for(scenario: RaceScenario, store_kind: str) -> List:
    """One store per region; the same shared vector for all regions under shared storage."""
    if store_kind == SHARED_STORE:
        shared = SharedGlobalVector(SharedMode.PLAIN, instrumented=False)
        shared.ensure_size(scenario.counter.current)
        return [shared] * len(scenario.regions)

    stores = []
    i_max = scenario.counter.current
    for region in scenario.regions:
        if store_kind.startswith("remap_"):
            kind = MapKind.ORDERED if store_kind == "remap_ordered" else MapKind.HASHED
            remap = remap_and_edit(region, kind)
            stores.append(OffsetLocalVector(0, remap.size, instrumented=False))
            continue
        scan = scan_identifiers(region.tape, region.start, region.end, region.inputs + region.outputs)
        stores.append(make_local_store(LocalStrategy(store_kind), RegionInfo(scan.min_id, scan.max_id, i_max),
                                       instrumented=False))
    return stores


def expected_entries(scenario: RaceScenario, modes: Sequence[SweepMode]) -> Tuple[float, ...]:
    """d(output 0)/d(shared input) of every region, each computed alone."""
    entries = []
    for region, mode in zip(scenario.regions, modes):
        block = compute_jacobian(region, HashMapStore(24, instrumented=False), mode)
        entries.append(block.entry(block.outputs[0], scenario.shared_input))
    return tuple(entries)


def _resolve_modes(scenario: RaceScenario, modes: Optional[Sequence]) -> List[SweepMode]:
    count = len(scenario.regions)
    modes = list(modes) if modes else [SweepMode.REVERSE] * count
    if len(modes) != count:
        raise ValueError(f"Got {len(modes)} modes for {count} regions")
    return [select_mode(len(region.inputs), len(region.outputs), mode)
            for region, mode in zip(scenario.regions, modes)]


def run_schedule(scenario: RaceScenario, store_kind: str, schedule: Optional[Sequence[int]] = None,
                 seed: Optional[int] = None, modes: Optional[Sequence] = None) -> RaceTrace:
    """
    Run the regions under one interleaving. The schedule lists the region to
    advance at each step; seed 0 (or no seed) means lockstep round robin, any
    other seed a random interleaving. Exhausted regions are skipped.
    """
    if store_kind != SHARED_STORE and store_kind not in LOCAL_STORES:
        raise ValueError(f"Unknown store kind for race simulation: {store_kind}")
    scenario = scenario.fork()
    count = len(scenario.regions)
    modes = _resolve_modes(scenario, modes)
    expected = expected_entries(scenario, modes)
    stores = _stores_for(scenario, store_kind)

    log: List[str] = []
    harvested: Dict[int, float] = {}
    observed: List[float] = []

    def make_hook(r: int):
        region = scenario.regions[r]
        store = stores[r]
        shared_position = region.inputs.index(scenario.shared_input)
        shared_cell = region.sweep_inputs[shared_position]
        first_output = region.sweep_outputs[0]

        def hook(index: int):
            if modes[r] is SweepMode.REVERSE:
                value = store.get(shared_cell)
                if index == 0:
                    harvested[r] = value
            else:
                value = store.get(first_output)
                if index == shared_position:
                    harvested[r] = value
            if not observed:
                observed.append(store.get(shared_cell) if modes[r] is SweepMode.REVERSE else value)
            log.append(f"region {r + 1}: harvest {value:g}")
        return hook

    generators = [
        _region_steps(region, stores[r], modes[r], log, f"region {r + 1}", make_hook(r))
        for r, region in enumerate(scenario.regions)
    ]
    active = list(range(count))
    taken: List[int] = []
    rng = np.random.default_rng(seed) if seed else None
    planned = list(schedule) if schedule is not None else None

    def advance(r: int) -> bool:
        try:
            next(generators[r])
        except StopIteration:
            active.remove(r)
            return False
        taken.append(r)
        return True

    if planned is not None:
        for r in planned:
            if r in active:
                advance(r)
    while active:
        if planned is not None or rng is None:
            for r in list(active):
                advance(r)
        else:
            advance(active[int(rng.integers(0, len(active)))])

    return RaceTrace(
        store=store_kind,
        schedule=tuple(taken),
        seed=seed,
        observed=observed[0] if observed else 0.0,
        harvested=tuple(harvested.get(r, 0.0) for r in range(count)),
        expected_separate=expected,
        log=log,
    )


def simulate_race(seed: int = 0, store_kind: str = SHARED_STORE, scenario: Optional[RaceScenario] = None,
                  modes: Optional[Sequence] = None) -> RaceTrace:
    """Race the regions of a scenario (default: the minimal 2*u / 5*u example) under a seeded interleaving."""
    return run_schedule(scenario or minimal_scenario(), store_kind, seed=seed, modes=modes)


def step_counts(scenario: RaceScenario, modes: Sequence[SweepMode]) -> List[int]:
    """Number of scheduler steps each region's preaccumulation takes."""
    counts = []
    for region, mode in zip(scenario.regions, modes):
        sweeps = len(region.outputs) if mode is SweepMode.REVERSE else len(region.inputs)
        counts.append(sweeps * (len(region) + 3))
    return counts


def enumerate_interleavings(store_kind: str = SHARED_STORE, scenario: Optional[RaceScenario] = None,
                            modes: Optional[Sequence] = None) -> List[RaceTrace]:
    """Run every interleaving of two regions' steps."""
    scenario = scenario or minimal_scenario()
    if len(scenario.regions) != 2:
        raise ValueError("Enumeration supports exactly two regions")
    modes = _resolve_modes(scenario, modes)
    first, second = step_counts(scenario, modes)
    total = first + second

    traces = []
    for positions in itertools.combinations(range(total), first):
        chosen = set(positions)
        schedule = [0 if step in chosen else 1 for step in range(total)]
        traces.append(run_schedule(scenario, store_kind, schedule=schedule, modes=modes))
    return traces
