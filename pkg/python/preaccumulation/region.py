"""
Preaccumulation regions, their Jacobian blocks and region validation.
"""

from dataclasses import dataclass, asdict
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd

from tape_core import ActiveValue, PASSIVE_ID, Tape, TapePosition

UNDECLARED_EXTERNAL_READ = "undeclared external read"
INTERMEDIATE_ESCAPES = "intermediate escapes region"
OUTPUT_NOT_ASSIGNED = "output not assigned in region"


class RegionError(ValueError):
    """Raised for malformed preaccumulation regions."""


@dataclass(frozen=True)
class RegionViolation:
    """One breach of the region connectivity requirement."""
    kind: str
    statement_index: int
    identifier: int

    def to_dict(self) -> Dict:
        return asdict(self)

    def __str__(self):
        return f"{self.kind}: identifier {self.identifier} at statement {self.statement_index}"


class PreaccRegion:
    """
    A marked tape range [start, end) with ordered declared inputs and outputs.

    id_floor is the largest identifier assigned when the region began; outputs
    must be assigned after it unless they are declared inputs.
    """

    def __init__(self, tape: Tape, start: TapePosition, id_floor: int):
        self.tape = tape
        self.start = start
        self.end: Optional[TapePosition] = None
        self.id_floor = id_floor
        self.inputs: List[int] = []
        self.outputs: List[int] = []
        self.output_values: List[Optional[ActiveValue]] = []

        # Contiguous identifiers written by remap_and_edit
        self.remapped_inputs: Optional[List[int]] = None
        self.remapped_outputs: Optional[List[int]] = None
        self.finished = False

    @property
    def closed(self) -> bool:
        return self.end is not None

    def __len__(self) -> int:
        end = self.end if self.end is not None else self.tape.position
        return end.index - self.start.index

    def _check_open_for_declarations(self):
        if self.finished:
            raise RegionError("Region already finished")

    def add_input(self, value):
        """Declare an input; its position fixes the Jacobian column."""
        self._check_open_for_declarations()
        identifier = _identifier_of(value)
        if identifier == PASSIVE_ID:
            raise RegionError("Passive values cannot be region inputs")
        if identifier in self.inputs:
            raise RegionError(f"Duplicate region input {identifier}")
        self.inputs.append(identifier)

    def add_output(self, value):
        """Declare an output; its position fixes the Jacobian row."""
        self._check_open_for_declarations()
        identifier = _identifier_of(value)
        if identifier == PASSIVE_ID:
            raise RegionError("Passive values cannot be region outputs")
        if identifier in self.outputs:
            raise RegionError(f"Duplicate region output {identifier}")
        if identifier <= self.id_floor and identifier not in self.inputs:
            raise RegionError(f"Output {identifier} was defined before the region started")
        self.outputs.append(identifier)
        self.output_values.append(value if isinstance(value, ActiveValue) else None)

    def close(self):
        if self.closed:
            raise RegionError("Region already closed")
        self.end = self.tape.position
        if self.tape.open_region is self:
            self.tape.open_region = None

    def shift(self, delta: int):
        """Move the region after a splice earlier on its tape."""
        self.start = TapePosition(self.start.index + delta)
        if self.end is not None:
            self.end = TapePosition(self.end.index + delta)

    @property
    def sweep_inputs(self) -> List[int]:
        return self.remapped_inputs if self.remapped_inputs is not None else self.inputs

    @property
    def sweep_outputs(self) -> List[int]:
        return self.remapped_outputs if self.remapped_outputs is not None else self.outputs

    def __repr__(self):
        end = self.end.index if self.end is not None else None
        return (f"PreaccRegion(start={self.start.index}, end={end}, "
                f"inputs={self.inputs}, outputs={self.outputs})")


def begin_region(tape: Tape) -> PreaccRegion:
    """Open a region at the current tape position. Regions do not nest."""
    if tape.open_region is not None:
        raise RegionError("A preaccumulation region is already open on this tape")
    region = PreaccRegion(tape, tape.position, tape.counter.current)
    tape.open_region = region
    tape.mark_region(region)
    return region


def _identifier_of(value) -> int:
    return value.id if isinstance(value, ActiveValue) else int(value)


@dataclass
class JacobianBlock:
    """m x n Jacobian of a region; rows and columns are associated with identifiers by position."""
    entries: np.ndarray
    inputs: Tuple[int, ...]
    outputs: Tuple[int, ...]

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.outputs), len(self.inputs)

    def entry(self, output_id: int, input_id: int) -> float:
        return float(self.entries[self.outputs.index(output_id), self.inputs.index(input_id)])

    def equals(self, other: 'JacobianBlock') -> bool:
        """Bit-exact comparison of entries and identifier labels."""
        return (self.inputs == other.inputs and self.outputs == other.outputs
                and self.entries.shape == other.entries.shape
                and bool(np.array_equal(self.entries, other.entries)))

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {'output_id': output_id, 'input_id': input_id, 'entry': float(self.entries[j, i])}
            for j, output_id in enumerate(self.outputs)
            for i, input_id in enumerate(self.inputs)
        ]
        return pd.DataFrame(rows, columns=['output_id', 'input_id', 'entry'])

    def to_csv(self, path=None) -> Optional[str]:
        """Debug dump as (output_id, input_id, entry) rows."""
        frame = self.to_frame()
        if path is None:
            return frame.to_csv(index=False, float_format='%.17g')
        frame.to_csv(path, index=False, float_format='%.17g')
        return None


def validate_region(region: PreaccRegion, other_tapes: Iterable[Tape] = ()) -> List[RegionViolation]:
    """
    Check that the region connects to the rest of the recording only through
    its declared inputs and outputs.

    Scans the owning tape (and optionally further tapes) completely.
    """
    if not region.closed:
        raise RegionError("Region must be closed before validation")

    tape = region.tape
    lo, hi = region.start.index, region.end.index
    lhs, arg_start, _, rhs = tape.columns()

    assigned = set(lhs[lo:hi])
    inputs = set(region.inputs)
    outputs = set(region.outputs)
    intermediates = assigned - outputs - inputs
    violations: List[RegionViolation] = []

    for index in range(lo, hi):
        for j in range(arg_start[index], arg_start[index + 1]):
            identifier = rhs[j]
            if identifier not in assigned and identifier not in inputs:
                violations.append(RegionViolation(UNDECLARED_EXTERNAL_READ, index, identifier))

    for output in region.outputs:
        if output not in assigned and output not in inputs:
            violations.append(RegionViolation(OUTPUT_NOT_ASSIGNED, lo, output))

    def scan_outside(columns, ranges):
        _, o_start, _, o_rhs = columns
        for first, last in ranges:
            for index in range(first, last):
                for j in range(o_start[index], o_start[index + 1]):
                    if o_rhs[j] in intermediates:
                        violations.append(RegionViolation(INTERMEDIATE_ESCAPES, index, o_rhs[j]))

    if intermediates:
        scan_outside(tape.columns(), [(0, lo), (hi, len(tape))])
        for other in other_tapes:
            if other is not tape:
                scan_outside(other.columns(), [(0, len(other))])

    return violations
