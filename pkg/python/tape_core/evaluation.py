"""
Forward and reverse evaluation of tape ranges against any adjoint store.

Access accounting per statement of arity k: the reverse sweep performs one
fused read-and-reset of the lhs adjoint plus a read-modify-write per argument
(1 + 2k accesses); the forward sweep reads k tangents and writes one (1 + k).
Zero-arity statements are input markers: both sweeps read the lhs cell once and
leave it untouched, so seeds placed on inputs survive a sweep over them.
"""

from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterable

from tape_core.identifiers import PASSIVE_ID
from tape_core.tape import Tape

_LHS_RESET = True


@contextmanager
def lhs_reset(enabled: bool):
    """Test hook: toggle the reset of lhs adjoints in reverse sweeps."""
    global _LHS_RESET
    previous = _LHS_RESET
    _LHS_RESET = enabled
    try:
        yield
    finally:
        _LHS_RESET = previous


@dataclass(frozen=True)
class IdentifierScan:
    """Identifier statistics of a tape range."""
    min_id: int
    max_id: int
    distinct_count: int


def evaluate_reverse(tape: Tape, start, end, adjoints):
    """
    Reverse sweep over [start, end):
    a = adj[lhs]; adj[lhs] = 0; adj[rhs_i] += partial_i * a.
    """
    lo, hi = tape.bounds(start, end)
    if lo == hi:
        return

    lhs, arg_start, partials, rhs = tape.columns()
    take = adjoints.take if _LHS_RESET else adjoints.get
    get = adjoints.get
    add = adjoints.add

    for index in range(hi - 1, lo - 1, -1):
        a0 = arg_start[index]
        a1 = arg_start[index + 1]
        if a0 == a1:
            get(lhs[index])
            continue
        adjoint = take(lhs[index])
        for j in range(a0, a1):
            add(rhs[j], partials[j] * adjoint)


def evaluate_forward(tape: Tape, start, end, tangents):
    """Forward sweep over [start, end): tan[lhs] = sum_i partial_i * tan[rhs_i]."""
    lo, hi = tape.bounds(start, end)
    if lo == hi:
        return

    lhs, arg_start, partials, rhs = tape.columns()
    get = tangents.get
    set_ = tangents.set

    for index in range(lo, hi):
        a0 = arg_start[index]
        a1 = arg_start[index + 1]
        if a0 == a1:
            get(lhs[index])
            continue
        total = 0.0
        for j in range(a0, a1):
            total += partials[j] * get(rhs[j])
        set_(lhs[index], total)


def range_identifiers(tape: Tape, start, end, extra: Iterable[int] = ()) -> list:
    """Distinct identifiers (lhs and rhs) of a range plus extras, in first-seen order."""
    lo, hi = tape.bounds(start, end)
    lhs, arg_start, _, rhs = tape.columns()
    seen = dict.fromkeys(i for i in extra if i != PASSIVE_ID)
    for index in range(lo, hi):
        seen[lhs[index]] = None
        for j in range(arg_start[index], arg_start[index + 1]):
            seen[rhs[j]] = None
    return list(seen)


def reset_range(tape: Tape, start, end, store, extra: Iterable[int] = ()):
    """Set every identifier occurring in the range (and any extras) to zero."""
    set_ = store.set
    for identifier in range_identifiers(tape, start, end, extra):
        set_(identifier, 0.0)


def scan_identifiers(tape: Tape, start, end, declared_inputs: Iterable[int] = ()) -> IdentifierScan:
    """Min, max and distinct count over all identifiers of the range and the declared inputs."""
    identifiers = range_identifiers(tape, start, end, declared_inputs)
    if not identifiers:
        raise ValueError("Cannot scan identifiers of an empty range")
    return IdentifierScan(min(identifiers), max(identifiers), len(identifiers))
