"""Jacobian taping and tape evaluation."""

from tape_core.identifiers import IdentifierCounter, PASSIVE_ID
from tape_core.tape import (
    RecordingError, Statement, Tape, TapePosition, active_tape,
)
from tape_core.active import (
    ActiveValue, ELEMENTARY_OPS, ElementaryOp, apply_op, copy, cos, exp, log,
    record_statement, register_input, sin,
)
from tape_core.evaluation import (
    IdentifierScan, evaluate_forward, evaluate_reverse, lhs_reset,
    range_identifiers, reset_range, scan_identifiers,
)

__all__ = [
    "IdentifierCounter", "PASSIVE_ID",
    "RecordingError", "Statement", "Tape", "TapePosition", "active_tape",
    "ActiveValue", "ELEMENTARY_OPS", "ElementaryOp", "apply_op", "copy", "cos",
    "exp", "log", "record_statement", "register_input", "sin",
    "IdentifierScan", "evaluate_forward", "evaluate_reverse", "lhs_reset",
    "range_identifiers", "reset_range", "scan_identifiers",
]
