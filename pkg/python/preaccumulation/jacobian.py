"""
Jacobian assembly of a region by unit-seed sweeps, and construction of the
statements that replace the region's recording.
"""

from enum import Enum
from typing import List, Tuple

import numpy as np

from preaccumulation.region import JacobianBlock, PreaccRegion, RegionError
from tape_core import Statement, evaluate_forward, evaluate_reverse, reset_range


class SweepMode(Enum):
    AUTO = "auto"
    FORWARD = "forward"
    REVERSE = "reverse"


def select_mode(n_inputs: int, m_outputs: int, mode=SweepMode.AUTO) -> SweepMode:
    """Reverse if m < n, forward if n < m, reverse on a tie."""
    mode = SweepMode(mode)
    if mode is not SweepMode.AUTO:
        return mode
    return SweepMode.FORWARD if n_inputs < m_outputs else SweepMode.REVERSE


def compute_jacobian(region: PreaccRegion, store, mode=SweepMode.AUTO) -> JacobianBlock:
    """
    Assemble the region's Jacobian on the given store.

    Uses the region's remapped identifiers when it has been edited; the block is
    always labelled with the declared identifiers. Every region identifier reads
    0 from the store afterwards.
    """
    if not region.closed:
        raise RegionError("Region must be closed before computing its Jacobian")

    tape = region.tape
    start, end = region.start, region.end
    inputs = list(region.sweep_inputs)
    outputs = list(region.sweep_outputs)
    declared = inputs + outputs
    n, m = len(inputs), len(outputs)
    entries = np.zeros((m, n), dtype=np.float64)

    if select_mode(n, m, mode) is SweepMode.REVERSE:
        for j, output in enumerate(outputs):
            store.set(output, 1.0)
            evaluate_reverse(tape, start, end, store)
            for i, identifier in enumerate(inputs):
                entries[j, i] = store.get(identifier)
            reset_range(tape, start, end, store, declared)
    else:
        for i, identifier in enumerate(inputs):
            store.set(identifier, 1.0)
            evaluate_forward(tape, start, end, store)
            for j, output in enumerate(outputs):
                entries[j, i] = store.get(output)
            reset_range(tape, start, end, store, declared)

    return JacobianBlock(entries, tuple(region.inputs), tuple(region.outputs))


def build_replacement(jacobian: JacobianBlock, counter) -> Tuple[List[Statement], List[Tuple[int, int]]]:
    """
    One statement per output, sorted by lhs, with exact-zero entries dropped.

    An output that is also an input gets a fresh identifier (identity copy);
    the returned (position, new id) pairs tell the caller which outputs moved.
    """
    inputs = set(jacobian.inputs)
    statements = []
    renamed = []
    for j, output in enumerate(jacobian.outputs):
        args = tuple(
            (float(jacobian.entries[j, i]), identifier)
            for i, identifier in enumerate(jacobian.inputs)
            if jacobian.entries[j, i] != 0.0
        )
        lhs = output
        if output in inputs:
            lhs = counter.next()
            renamed.append((j, lhs))
        statements.append(Statement(lhs, args))

    statements.sort(key=lambda statement: statement.lhs)
    return statements, renamed
