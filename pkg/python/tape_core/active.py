"""
Active values and elementary operations recorded on the calling worker's tape.
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, Sequence, Tuple, Union

from tape_core.identifiers import PASSIVE_ID
from tape_core.tape import RecordingError, active_tape


@dataclass(frozen=True)
class ElementaryOp:
    """Primal function and partials of one elementary operation."""
    name: str
    arity: int
    primal: Callable[..., float]
    partials: Callable[..., Tuple[float, ...]]


ELEMENTARY_OPS: Dict[str, ElementaryOp] = {
    op.name: op for op in (
        ElementaryOp("add", 2, lambda a, b: a + b, lambda a, b: (1.0, 1.0)),
        ElementaryOp("sub", 2, lambda a, b: a - b, lambda a, b: (1.0, -1.0)),
        ElementaryOp("mul", 2, lambda a, b: a * b, lambda a, b: (b, a)),
        ElementaryOp("div", 2, lambda a, b: a / b, lambda a, b: (1.0 / b, -a / (b * b))),
        ElementaryOp("sin", 1, math.sin, lambda a: (math.cos(a),)),
        ElementaryOp("cos", 1, math.cos, lambda a: (-math.sin(a),)),
        ElementaryOp("exp", 1, math.exp, lambda a: (math.exp(a),)),
        ElementaryOp("log", 1, math.log, lambda a: (1.0 / a,)),
        ElementaryOp("copy", 1, lambda a: a, lambda a: (1.0,)),
    )
}


class ActiveValue:
    """A primal value paired with its identifier (0 for passive data)."""

    __slots__ = ("primal", "id")

    def __init__(self, primal: float, id: int = PASSIVE_ID):
        self.primal = float(primal)
        self.id = id

    @property
    def is_active(self) -> bool:
        return self.id != PASSIVE_ID

    def __add__(self, other):
        return apply_op("add", self, other)

    def __radd__(self, other):
        return apply_op("add", other, self)

    def __sub__(self, other):
        return apply_op("sub", self, other)

    def __rsub__(self, other):
        return apply_op("sub", other, self)

    def __mul__(self, other):
        return apply_op("mul", self, other)

    def __rmul__(self, other):
        return apply_op("mul", other, self)

    def __truediv__(self, other):
        return apply_op("div", self, other)

    def __rtruediv__(self, other):
        return apply_op("div", other, self)

    def __neg__(self):
        return record_statement([self], -self.primal, [-1.0])

    def __float__(self):
        return self.primal

    def __repr__(self):
        return f"ActiveValue(primal={self.primal!r}, id={self.id})"


Operand = Union[ActiveValue, float, int]


def _primal(value: Operand) -> float:
    return value.primal if isinstance(value, ActiveValue) else float(value)


def _identifier(value: Operand) -> int:
    return value.id if isinstance(value, ActiveValue) else PASSIVE_ID


def register_input(value: float) -> ActiveValue:
    """Register an independent input on the active tape."""
    tape = active_tape()
    return ActiveValue(value, tape.record_input())


def record_statement(inputs: Sequence[Operand], primal_result: float,
                     partials: Sequence[float]) -> ActiveValue:
    """
    Record lhs = phi(inputs) with precomputed partials on the active tape.

    Arguments with passive identifiers are dropped. If no argument is active the
    result is passive and nothing is recorded.
    """
    if len(inputs) != len(partials):
        raise ValueError(f"Got {len(inputs)} inputs but {len(partials)} partials")

    args = [(partial, _identifier(value)) for value, partial in zip(inputs, partials)]
    if all(rhs == PASSIVE_ID for _, rhs in args):
        return ActiveValue(primal_result)

    lhs = active_tape().record(args)
    return ActiveValue(primal_result, lhs)


def apply_op(name: str, *operands: Operand):
    """Apply an elementary operation, recording it if any operand is active."""
    op = ELEMENTARY_OPS[name]
    if len(operands) != op.arity:
        raise ValueError(f"Operation '{name}' takes {op.arity} operands, got {len(operands)}")

    primals = [_primal(value) for value in operands]
    if not any(isinstance(value, ActiveValue) and value.is_active for value in operands):
        return op.primal(*primals)

    try:
        result = op.primal(*primals)
        partials = op.partials(*primals)
    except (OverflowError, ValueError, ZeroDivisionError) as e:
        raise RecordingError(f"Cannot record {name}{tuple(primals)}: {e}") from e
    if not math.isfinite(result):
        raise RecordingError(f"Non-finite result {result} of {name}{tuple(primals)}")
    return record_statement(operands, result, partials)


def sin(value: Operand):
    return apply_op("sin", value)


def cos(value: Operand):
    return apply_op("cos", value)


def exp(value: Operand):
    return apply_op("exp", value)


def log(value: Operand):
    return apply_op("log", value)


def copy(value: Operand):
    """Copy-assignment: a new statement with partial 1.0 and a fresh identifier."""
    return apply_op("copy", value)
