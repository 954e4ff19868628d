"""
Synthetic preaccumulation workloads: families of isomorphic regions that share
some of their inputs, recorded on one tape per worker.

Generation algorithm (seeded numpy Generator, fixed draw order):
  1. One region template is drawn. A cursor starts at input 0. Each step draws
     a candidate second operand (the next unconsumed input, otherwise a random
     earlier value), then an operation from op_mix restricted to operations
     whose result stays within +-value_bound and whose local partials and
     first three derivatives with respect to the raw inputs stay within
     derivative_bound; copy is the fallback. The result becomes the new
     cursor. The last m results are the outputs.
  2. Shared input values are drawn, then private input values per worker and
     region, all uniform in [input_low, input_high].
  3. Padding and the shared inputs are recorded on tape 0; each worker then
     registers its private inputs and records its regions.
"""

import copy
import json
import math
import time
from dataclasses import dataclass, field, asdict
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from engine_settings import HarnessConfig
from monitoring.logging_config import get_logger
from preaccumulation import PreaccRegion, begin_region
from tape_core import ActiveValue, ELEMENTARY_OPS, IdentifierCounter, Tape, TapePosition, apply_op, register_input

logger = get_logger("Workload")

GENERATED_OPS = ("add", "sub", "mul", "div", "sin", "cos", "exp", "log")
FALLBACK_OP = "copy"
MIN_DIVISOR = 0.1
MIN_LOG_ARGUMENT = 0.1
MAX_EXP_ARGUMENT = 700.0

Interval = Tuple[float, float]


@dataclass(frozen=True)
class ValueBound:
    """
    Range of a generated value together with bounds on the magnitudes of its
    first three directional derivatives, for directions whose components lie
    in [-1, 1]. A raw input has d1 = 1 and no curvature.
    """
    low: float
    high: float
    d1: float = 1.0
    d2: float = 0.0
    d3: float = 0.0

    @property
    def interval(self) -> Interval:
        return (self.low, self.high)

    @property
    def magnitude(self) -> float:
        return max(abs(self.low), abs(self.high))

    @classmethod
    def of(cls, value) -> 'ValueBound':
        if isinstance(value, ValueBound):
            return value
        low, high = value
        return cls(float(low), float(high))


def default_op_mix() -> Dict[str, float]:
    return {name: 1.0 for name in GENERATED_OPS}


@dataclass
class WorkloadSpec:
    """Workload parameters. Serialized with the key "T" for the worker count."""
    workers: int = 1
    regions_per_worker: int = 1
    chain_length: int = 5
    n_inputs: int = 1
    m_outputs: int = 1
    shared_inputs: int = 0
    op_mix: Dict[str, float] = field(default_factory=default_op_mix)
    seed: int = 0
    padding_statements: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.workers < 1:
            raise ValueError(f"T must be at least 1, got {self.workers}")
        if self.regions_per_worker < 1:
            raise ValueError(f"regions_per_worker must be at least 1, got {self.regions_per_worker}")
        if self.chain_length < 1:
            raise ValueError(f"chain_length must be at least 1, got {self.chain_length}")
        if self.n_inputs < 1:
            raise ValueError(f"n_inputs must be at least 1, got {self.n_inputs}")
        if not 1 <= self.m_outputs <= self.chain_length:
            raise ValueError(f"m_outputs must lie in [1, chain_length], got {self.m_outputs}")
        if not 0 <= self.shared_inputs <= self.n_inputs:
            raise ValueError(f"shared_inputs must lie in [0, n_inputs], got {self.shared_inputs}")
        if self.padding_statements < 0:
            raise ValueError(f"padding_statements must be non-negative, got {self.padding_statements}")
        if not self.op_mix:
            raise ValueError("op_mix must name at least one operation")
        for name, weight in self.op_mix.items():
            if name not in GENERATED_OPS:
                raise ValueError(f"Unknown operation in op_mix: {name}")
            if weight < 0:
                raise ValueError(f"Negative op_mix weight for {name}: {weight}")
        if sum(self.op_mix.values()) <= 0:
            raise ValueError("op_mix weights must not all be zero")

    @property
    def region_size(self) -> int:
        """|V_t|: inputs plus one node per statement."""
        return self.chain_length + self.n_inputs

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["T"] = data.pop("workers")
        return {key: data[key] for key in (
            "T", "regions_per_worker", "chain_length", "n_inputs", "m_outputs",
            "shared_inputs", "op_mix", "seed", "padding_statements",
        )}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'WorkloadSpec':
        data = dict(data)
        if "workers" in data:
            raise ValueError("Unknown WorkloadSpec field: workers (use \"T\")")
        if "T" in data:
            data["workers"] = data.pop("T")
        try:
            return cls(**data)
        except TypeError as e:
            raise ValueError(f"Invalid WorkloadSpec document: {e}") from e

    @classmethod
    def from_json(cls, json_str: str) -> 'WorkloadSpec':
        return cls.from_dict(json.loads(json_str))

    def replace(self, **changes) -> 'WorkloadSpec':
        data = asdict(self)
        data.update(changes)
        return WorkloadSpec(**data)


@dataclass(frozen=True)
class TemplateOp:
    """One statement of a region template; operands index the value pool (inputs, then results)."""
    op: str
    operands: Tuple[int, ...]


@dataclass(frozen=True)
class RegionTemplate:
    """Value-independent statement structure shared by all generated regions."""
    n_inputs: int
    ops: Tuple[TemplateOp, ...]
    output_slots: Tuple[int, ...]
    output_intervals: Tuple[Interval, ...] = ()
    output_bounds: Tuple[ValueBound, ...] = ()

    @property
    def chain_length(self) -> int:
        return len(self.ops)

    @property
    def m_outputs(self) -> int:
        return len(self.output_slots)

    def signature(self) -> Tuple[Tuple[str, int], ...]:
        return tuple((op.op, len(op.operands)) for op in self.ops)

    def evaluate(self, inputs: Sequence) -> Tuple[List, List]:
        """
        Run the template on floats or active values. Active operands are
        recorded on the calling thread's active tape.

        Returns:
            (all results in statement order, the output values)
        """
        if len(inputs) != self.n_inputs:
            raise ValueError(f"Template takes {self.n_inputs} inputs, got {len(inputs)}")
        pool = list(inputs)
        for step in self.ops:
            pool.append(apply_op(step.op, *(pool[index] for index in step.operands)))
        results = pool[self.n_inputs:]
        return results, [pool[slot] for slot in self.output_slots]


def _max_abs_sin(low: float, high: float) -> float:
    if high - low >= math.pi:
        return 1.0
    peak = math.pi / 2.0 + math.pi * math.ceil((low - math.pi / 2.0) / math.pi)
    if peak <= high:
        return 1.0
    return max(abs(math.sin(low)), abs(math.sin(high)))


def _max_abs_cos(low: float, high: float) -> float:
    return _max_abs_sin(low + math.pi / 2.0, high + math.pi / 2.0)


def _compose(a: ValueBound, low: float, high: float, g1: float, g2: float, g3: float) -> ValueBound:
    """Bound of g(a), given |g'| <= g1, |g''| <= g2 and |g'''| <= g3 over the range of a."""
    return ValueBound(
        low, high,
        g1 * a.d1,
        g2 * a.d1 ** 2 + g1 * a.d2,
        g3 * a.d1 ** 3 + 3.0 * g2 * a.d1 * a.d2 + g1 * a.d3,
    )


def _product(a: ValueBound, b: ValueBound) -> ValueBound:
    products = (a.low * b.low, a.low * b.high, a.high * b.low, a.high * b.high)
    ma, mb = a.magnitude, b.magnitude
    return ValueBound(
        min(products), max(products),
        mb * a.d1 + ma * b.d1,
        mb * a.d2 + 2.0 * a.d1 * b.d1 + ma * b.d2,
        mb * a.d3 + 3.0 * (a.d2 * b.d1 + a.d1 * b.d2) + ma * b.d3,
    )


def _propagate(name: str, a: ValueBound, b: Optional[ValueBound]) -> Optional[Tuple[ValueBound, float]]:
    """Bound of the result and of its largest local partial, or None outside the safe domain."""
    if name == "add":
        return ValueBound(a.low + b.low, a.high + b.high, a.d1 + b.d1, a.d2 + b.d2, a.d3 + b.d3), 1.0
    if name == "sub":
        return ValueBound(a.low - b.high, a.high - b.low, a.d1 + b.d1, a.d2 + b.d2, a.d3 + b.d3), 1.0
    if name == "mul":
        return _product(a, b), max(a.magnitude, b.magnitude)
    if name == "div":
        if b.low <= MIN_DIVISOR and b.high >= -MIN_DIVISOR:
            return None
        smallest = min(abs(b.low), abs(b.high))
        reciprocal = _compose(b, 1.0 / b.high, 1.0 / b.low,
                              smallest ** -2, 2.0 * smallest ** -3, 6.0 * smallest ** -4)
        return _product(a, reciprocal), max(1.0 / smallest, a.magnitude / smallest ** 2)
    if name == "sin":
        s, c = _max_abs_sin(a.low, a.high), _max_abs_cos(a.low, a.high)
        return _compose(a, -1.0, 1.0, c, s, c), c
    if name == "cos":
        s, c = _max_abs_sin(a.low, a.high), _max_abs_cos(a.low, a.high)
        return _compose(a, -1.0, 1.0, s, c, s), s
    if name == "exp":
        if a.high > MAX_EXP_ARGUMENT:
            return None
        top = math.exp(a.high)
        return _compose(a, math.exp(a.low), top, top, top, top), top
    if name == "log":
        if a.low < MIN_LOG_ARGUMENT:
            return None
        inverse = 1.0 / a.low
        return _compose(a, math.log(a.low), math.log(a.high), inverse, inverse ** 2, 2.0 * inverse ** 3), inverse
    if name == "copy":
        return a, 1.0
    raise ValueError(f"Unknown operation: {name}")


def _admissible(name: str, a: ValueBound, b: Optional[ValueBound], value_bound: float,
                derivative_bound: float) -> Optional[ValueBound]:
    propagated = _propagate(name, a, b)
    if propagated is None:
        return None
    bound, partial = propagated
    if bound.magnitude > value_bound or partial > derivative_bound:
        return None
    if max(bound.d1, bound.d2, bound.d3) > derivative_bound:
        return None
    return bound


def generate_template(rng: np.random.Generator, n_inputs: int, m_outputs: int, chain_length: int,
                      op_mix: Dict[str, float], input_bounds: Sequence,
                      value_bound: float = 100.0, derivative_bound: float = 100.0) -> RegionTemplate:
    """
    Draw a region template whose primal values stay within +-value_bound and
    whose local partials and first three derivatives stay within
    derivative_bound. input_bounds holds ValueBounds or (low, high) pairs.
    """
    names = [name for name in GENERATED_OPS if op_mix.get(name, 0.0) > 0]
    weights = np.array([op_mix[name] for name in names], dtype=np.float64)

    bounds: List[ValueBound] = [ValueBound.of(value) for value in input_bounds]
    cursor = 0
    next_input = 1
    ops = []

    for _ in range(chain_length):
        consumes_input = next_input < n_inputs
        if consumes_input:
            other = next_input
        else:
            other = int(rng.integers(0, len(bounds)))

        admissible = {}
        for name in names:
            operand = bounds[other] if ELEMENTARY_OPS[name].arity == 2 else None
            bound = _admissible(name, bounds[cursor], operand, value_bound, derivative_bound)
            if bound is not None:
                admissible[name] = bound

        mask = np.array([name in admissible for name in names])
        if mask.any():
            masked = np.where(mask, weights, 0.0)
            name = names[int(rng.choice(len(names), p=masked / masked.sum()))]
            bound = admissible[name]
        else:
            name = FALLBACK_OP
            bound = bounds[cursor]

        if ELEMENTARY_OPS[name].arity == 2:
            operands = (cursor, other)
            if consumes_input:
                next_input += 1
        else:
            operands = (cursor,)

        ops.append(TemplateOp(name, operands))
        bounds.append(bound)
        cursor = len(bounds) - 1

    slots = tuple(range(n_inputs + chain_length - m_outputs, n_inputs + chain_length))
    return RegionTemplate(n_inputs, tuple(ops), slots,
                          tuple(bounds[slot].interval for slot in slots),
                          tuple(bounds[slot] for slot in slots))


@dataclass
class WorkerPlan:
    """One worker's tape, its recorded regions and the values bound to them."""
    worker: int
    tape: Tape
    regions: List[PreaccRegion]
    inputs: List[List[ActiveValue]]
    outputs: List[List[ActiveValue]]
    eval_start: TapePosition


@dataclass
class Workload:
    """Recorded workload ready for simultaneous preaccumulation."""
    spec: WorkloadSpec
    template: RegionTemplate
    counter: IdentifierCounter
    shared_inputs: List[ActiveValue]
    plans: List[WorkerPlan]
    record_ns: int = 0

    @property
    def tapes(self) -> List[Tape]:
        return [plan.tape for plan in self.plans]

    @property
    def i_max(self) -> int:
        return self.counter.current

    def fork(self) -> 'Workload':
        """Independent copy (tapes, regions, counter) for another run."""
        return copy.deepcopy(self)

    def region_inputs(self) -> List[List[Tuple[int, ...]]]:
        return [[tuple(region.inputs) for region in plan.regions] for plan in self.plans]


def generate_workload(spec: WorkloadSpec, harness: Optional[HarnessConfig] = None) -> Workload:
    """Draw the template and input values, then record every worker's regions."""
    harness = harness or HarnessConfig()
    rng = np.random.default_rng(spec.seed)
    low, high = harness.input_low, harness.input_high

    template = generate_template(
        rng, spec.n_inputs, spec.m_outputs, spec.chain_length, spec.op_mix,
        [(low, high)] * spec.n_inputs, harness.value_bound, harness.derivative_bound,
    )
    shared_values = rng.uniform(low, high, size=spec.shared_inputs)
    private_count = spec.n_inputs - spec.shared_inputs
    private_values = rng.uniform(low, high, size=(spec.workers, spec.regions_per_worker, private_count))

    started = time.perf_counter_ns()
    counter = IdentifierCounter()
    tapes = [Tape(worker, counter) for worker in range(spec.workers)]

    with tapes[0].recording():
        tapes[0].record_padding(spec.padding_statements)
        shared = [register_input(float(value)) for value in shared_values]

    plans = []
    for worker, tape in enumerate(tapes):
        eval_start = tape.position
        regions, inputs, outputs = [], [], []
        with tape.recording():
            for r in range(spec.regions_per_worker):
                private = [register_input(float(value)) for value in private_values[worker, r]]
                region_inputs = shared + private
                region = begin_region(tape)
                for value in region_inputs:
                    region.add_input(value)
                _, region_outputs = template.evaluate(region_inputs)
                for value in region_outputs:
                    region.add_output(value)
                region.close()
                regions.append(region)
                inputs.append(region_inputs)
                outputs.append(region_outputs)
        plans.append(WorkerPlan(worker, tape, regions, inputs, outputs, eval_start))

    record_ns = time.perf_counter_ns() - started
    logger.debug(f"Recorded workload: T={spec.workers}, regions={spec.regions_per_worker}, "
                 f"i_max={counter.current}, {record_ns} ns")
    return Workload(spec, template, counter, shared, plans, record_ns)
