"""
Random test programs and gradient oracles.

An EmbeddedProgram computes a scalar from raw inputs in three stages:
prologue (raw inputs -> region inputs), region (-> region outputs) and
epilogue (-> scalar). The region stage can be preaccumulated with any
strategy, which makes it the reference for gradient preservation checks.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from engine_settings import HarnessConfig
from parallel_harness.workload import RegionTemplate, default_op_mix, generate_template
from preaccumulation import PreaccumulationHelper, Strategy
from tape_core import ActiveValue, IdentifierCounter, Tape, evaluate_reverse, register_input
from adjoint_stores import FullLocalVector, SharedGlobalVector

FD_STEP = 1e-6


def central_difference(func: Callable[[np.ndarray], float], x: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    """Central differences with step h = step * max(1, |x_i|) per component."""
    x = np.asarray(x, dtype=np.float64)
    gradient = np.zeros_like(x)
    for i in range(x.size):
        h = step * max(1.0, abs(x[i]))
        forward = x.copy()
        backward = x.copy()
        forward[i] += h
        backward[i] -= h
        gradient[i] = (func(forward) - func(backward)) / (2.0 * h)
    return gradient


def gradients_close(actual: np.ndarray, expected: np.ndarray, rtol: float, atol: Optional[float] = None) -> bool:
    """Componentwise |actual - expected| <= atol + rtol * |expected|; atol defaults to rtol."""
    actual = np.asarray(actual, dtype=np.float64)
    expected = np.asarray(expected, dtype=np.float64)
    if actual.shape != expected.shape:
        return False
    atol = rtol if atol is None else atol
    return bool(np.all(np.abs(actual - expected) <= atol + rtol * np.abs(expected)))


def template_value(template: RegionTemplate, x: Sequence[float], weights: Sequence[float]) -> float:
    """Weighted sum of the template outputs evaluated on plain floats."""
    _, outputs = template.evaluate([float(value) for value in x])
    return float(sum(w * y for w, y in zip(weights, outputs)))


def template_gradient(template: RegionTemplate, x: Sequence[float], weights: Sequence[float]) -> np.ndarray:
    """Reverse-mode gradient of the weighted output sum."""
    tape = Tape()
    with tape.recording():
        inputs = [register_input(float(value)) for value in x]
        _, outputs = template.evaluate(inputs)

    adjoints = FullLocalVector(tape.counter.current, instrumented=False)
    for weight, value in zip(weights, outputs):
        adjoints.add(value.id, float(weight))
    evaluate_reverse(tape, None, None, adjoints)
    return np.array([adjoints.get(value.id) for value in inputs])


@dataclass(frozen=True)
class EmbeddedProgram:
    """Prologue, region and epilogue templates chained into a scalar function."""
    prologue: RegionTemplate
    region: RegionTemplate
    epilogue: RegionTemplate

    @property
    def n_raw(self) -> int:
        return self.prologue.n_inputs

    def value(self, x: Sequence[float]) -> float:
        _, middle = self.prologue.evaluate([float(v) for v in x])
        _, outputs = self.region.evaluate(middle)
        _, result = self.epilogue.evaluate(outputs)
        return float(result[0])

    def record(self, x: Sequence[float], strategy=None, mode=None,
               shared_store: Optional[SharedGlobalVector] = None, validate: bool = True):
        """
        Record the program on a fresh tape, preaccumulating the region stage
        when a strategy is given.

        Returns:
            (tape, raw input values, scalar result value, region helper or None)
        """
        tape = Tape(0, IdentifierCounter())
        helper = None
        with tape.recording():
            raw = [register_input(float(v)) for v in x]
            _, middle = self.prologue.evaluate(raw)
            if strategy is not None:
                helper = PreaccumulationHelper(tape, shared_store)
                region = helper.begin()
                for value in middle:
                    region.add_input(value)
                _, outputs = self.region.evaluate(middle)
                for value in outputs:
                    region.add_output(value)
                helper.finish(region, strategy, mode=mode, validate=validate)
            else:
                _, outputs = self.region.evaluate(middle)
            _, result = self.epilogue.evaluate(outputs)
        return tape, raw, result[0], helper

    def gradient(self, x: Sequence[float], strategy=None, mode=None) -> np.ndarray:
        """Reverse gradient of the scalar result with respect to the raw inputs."""
        shared = None
        if strategy is not None:
            strategy = Strategy(strategy)
            if strategy.is_shared:
                shared = SharedGlobalVector(strategy.shared_mode, instrumented=False)
        tape, raw, result, _ = self.record(x, strategy, mode, shared)
        if not isinstance(result, ActiveValue) or not result.is_active:
            return np.zeros(len(raw))
        adjoints = FullLocalVector(tape.counter.current, instrumented=False)
        adjoints.set(result.id, 1.0)
        evaluate_reverse(tape, None, None, adjoints)
        return np.array([adjoints.get(value.id) for value in raw])


def random_program(seed: int, n_raw: int = 2, n_inputs: int = 3, m_outputs: int = 2, chain_length: int = 20,
                   prologue_length: Optional[int] = None, epilogue_length: Optional[int] = None,
                   op_mix=None, harness: Optional[HarnessConfig] = None) -> EmbeddedProgram:
    """
    Draw a three-stage program. Each stage is generated against the output
    bounds of the stage feeding it, so the value and derivative guards hold
    end to end with respect to the raw inputs.
    """
    harness = harness or HarnessConfig()
    op_mix = op_mix or default_op_mix()
    rng = np.random.default_rng(seed)
    bound = harness.value_bound
    slope = harness.derivative_bound
    prologue_length = prologue_length or max(n_inputs, 3)
    epilogue_length = epilogue_length or max(m_outputs, 3)

    raw_interval = (harness.input_low, harness.input_high)
    prologue = generate_template(rng, n_raw, n_inputs, prologue_length, op_mix, [raw_interval] * n_raw, bound, slope)
    region = generate_template(rng, n_inputs, m_outputs, chain_length, op_mix, prologue.output_bounds, bound, slope)
    epilogue = generate_template(rng, m_outputs, 1, epilogue_length, op_mix, region.output_bounds, bound, slope)
    return EmbeddedProgram(prologue, region, epilogue)
