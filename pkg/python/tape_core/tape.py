"""
Jacobian tape: append-only record of statements with precomputed partials.

Statements are stored column-wise (lhs identifiers, argument offsets, partials,
rhs identifiers) so that bulk padding, splicing and byte accounting stay cheap.
"""

import math
import threading
from array import array
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple

from tape_core.identifiers import IdentifierCounter, PASSIVE_ID
from monitoring.logging_config import get_logger


class RecordingError(RuntimeError):
    """Raised when a statement cannot be recorded."""


@dataclass(frozen=True, order=True)
class TapePosition:
    """Statement count at a point in time."""
    index: int

    def __index__(self) -> int:
        return self.index

    def __int__(self) -> int:
        return self.index


@dataclass(frozen=True)
class Statement:
    """One recorded assignment lhs = phi(rhs...), stored as its partials."""
    lhs: int
    args: Tuple[Tuple[float, int], ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    def to_line(self) -> str:
        """Render in the tape dump format."""
        parts = [f"{self.lhs} <-"]
        parts.extend(f"({partial:.17g},{rhs})" for partial, rhs in self.args)
        return " ".join(parts)


class _ActiveTapeContext(threading.local):
    def __init__(self):
        self.tape = None


_active = _ActiveTapeContext()


def active_tape() -> "Tape":
    """Tape the calling thread is currently recording on."""
    tape = _active.tape
    if tape is None:
        raise RecordingError("No active tape on this thread; use 'with tape.recording():'")
    return tape


class Tape:
    """
    Per-worker tape. Only its owner appends; any worker may evaluate it once
    recording has stopped.
    """

    def __init__(self, owner: int = 0, counter: Optional[IdentifierCounter] = None):
        self.owner = owner
        self.counter = counter if counter is not None else IdentifierCounter()
        self.logger = get_logger("Tape")

        self._lhs = array('q')
        self._arg_start = array('q', [0])
        self._partials = array('d')
        self._rhs = array('q')

        # Regions marked on this tape; their positions move when the tape is spliced
        self._regions: list = []
        self.open_region = None

    # ------------------------------------------------------------------ recording

    @contextmanager
    def recording(self):
        """Make this tape the active tape of the calling thread."""
        previous = _active.tape
        _active.tape = self
        try:
            yield self
        finally:
            _active.tape = previous

    @property
    def position(self) -> TapePosition:
        return TapePosition(len(self._lhs))

    def __len__(self) -> int:
        return len(self._lhs)

    def record_input(self) -> int:
        """Record a zero-arity statement owning a fresh identifier."""
        lhs = self.counter.next()
        self._lhs.append(lhs)
        self._arg_start.append(len(self._partials))
        return lhs

    def record(self, args: Sequence[Tuple[float, int]]) -> int:
        """
        Record a statement with a fresh left-hand side.

        Args:
            args: (partial, rhs identifier) pairs; passive arguments are dropped

        Returns:
            int: the assigned lhs identifier
        """
        kept = []
        for partial, rhs in args:
            partial = float(partial)
            if not math.isfinite(partial):
                raise RecordingError(f"Non-finite partial {partial} for argument {rhs}")
            if rhs != PASSIVE_ID:
                kept.append((partial, rhs))

        lhs = self.counter.next()
        for _, rhs in kept:
            if rhs >= lhs:
                raise RecordingError(f"Acyclicity violated: argument {rhs} not assigned before {lhs}")

        self._lhs.append(lhs)
        for partial, rhs in kept:
            self._partials.append(partial)
            self._rhs.append(rhs)
        self._arg_start.append(len(self._partials))
        return lhs

    def record_padding(self, count: int) -> range:
        """Record a block of zero-arity statements (used to inflate i_max)."""
        ids = self.counter.reserve(count)
        self._lhs.extend(ids)
        self._arg_start.extend([len(self._partials)] * count)
        return ids

    # ------------------------------------------------------------------ editing

    def replace_range(self, start, end, statements: Sequence[Statement]):
        """
        Replace statements [start, end) by the given statements.
        Regions marked after the replaced range are shifted accordingly.
        """
        lo, hi = self.bounds(start, end)

        new_lhs = array('q')
        new_partials = array('d')
        new_rhs = array('q')
        new_starts = array('q')
        offset = self._arg_start[lo]
        for statement in statements:
            new_lhs.append(statement.lhs)
            new_starts.append(offset + len(new_partials))
            for partial, rhs in statement.args:
                new_partials.append(float(partial))
                new_rhs.append(rhs)

        arg_lo, arg_hi = self._arg_start[lo], self._arg_start[hi]
        arg_shift = len(new_partials) - (arg_hi - arg_lo)
        statement_shift = len(statements) - (hi - lo)

        tail = array('q', (value + arg_shift for value in self._arg_start[hi:]))
        self._arg_start = self._arg_start[:lo] + new_starts + tail
        self._partials[arg_lo:arg_hi] = new_partials
        self._rhs[arg_lo:arg_hi] = new_rhs
        self._lhs[lo:hi] = new_lhs

        if statement_shift:
            for region in self._regions:
                if region.start.index >= hi:
                    region.shift(statement_shift)

    def rewrite_identifier(self, statement_index: int, arg_index: Optional[int], new_id: int):
        """Overwrite an identifier in place: the lhs if arg_index is None, else an rhs."""
        if arg_index is None:
            self._lhs[statement_index] = new_id
        else:
            self._rhs[self._arg_start[statement_index] + arg_index] = new_id

    def mark_region(self, region):
        self._regions.append(region)

    def unmark_region(self, region):
        self._regions = [marked for marked in self._regions if marked is not region]

    # ------------------------------------------------------------------ inspection

    def columns(self) -> Tuple[array, array, array, array]:
        """Raw columns (lhs, arg_start, partials, rhs) for evaluation loops."""
        return self._lhs, self._arg_start, self._partials, self._rhs

    def statement(self, index: int) -> Statement:
        a0, a1 = self._arg_start[index], self._arg_start[index + 1]
        args = tuple(zip(self._partials[a0:a1], self._rhs[a0:a1]))
        return Statement(self._lhs[index], args)

    def statements(self, start=None, end=None) -> Iterator[Statement]:
        lo, hi = self.bounds(start, end)
        for index in range(lo, hi):
            yield self.statement(index)

    def argument_count(self, start=None, end=None) -> int:
        lo, hi = self.bounds(start, end)
        return self._arg_start[hi] - self._arg_start[lo]

    def recorded_bytes(self) -> int:
        """Bytes held by the recorded columns."""
        return sum(column.itemsize * len(column)
                   for column in (self._lhs, self._arg_start, self._partials, self._rhs))

    def dump(self, start=None, end=None) -> str:
        """Line-oriented text dump, one statement per line."""
        return "\n".join(statement.to_line() for statement in self.statements(start, end))

    def bounds(self, start=None, end=None) -> Tuple[int, int]:
        lo = 0 if start is None else int(start)
        hi = len(self._lhs) if end is None else int(end)
        if not 0 <= lo <= hi <= len(self._lhs):
            raise IndexError(f"Invalid tape range [{lo}, {hi}) for tape of {len(self._lhs)} statements")
        return lo, hi

    def __repr__(self):
        return f"Tape(owner={self.owner}, statements={len(self._lhs)})"
