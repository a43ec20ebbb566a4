"""Primitive operations of the RAM over arbitrary-precision naturals.

Python ``int`` already is an unbounded integer, so a "Nat" here is just a
nonnegative ``int``.  What this module adds is the RAM's semantics on top of
it: natural subtraction (monus), the tweaked negation that only flips bits up
to the most significant one, and the comparator/subtraction synthesis that
needs nothing but ``+``, ``¬``, ``∧``, ``∨`` and equality.
"""

from __future__ import annotations

import contextlib
import contextvars
import enum
from typing import Iterator

from pelram.errors import DivisionByZero, InexactDivision, ResourceLimit

DEFAULT_BIT_CEILING = 1 << 26

_ceiling: contextvars.ContextVar[int] = contextvars.ContextVar(
    "pelram_bit_ceiling", default=DEFAULT_BIT_CEILING
)


def get_bit_ceiling() -> int:
    return _ceiling.get()


@contextlib.contextmanager
def bit_ceiling(bits: int) -> Iterator[int]:
    """Temporarily change the bit-length ceiling for the current context."""
    if bits < 1:
        raise ValueError("bit ceiling must be positive")
    token = _ceiling.set(bits)
    try:
        yield bits
    finally:
        _ceiling.reset(token)


def check_bits(nbits: int, what: str = "value") -> None:
    """Raise ResourceLimit if a result of ``nbits`` bits is over the ceiling."""
    limit = _ceiling.get()
    if nbits > limit:
        size = str(nbits) if nbits.bit_length() <= 64 else f"about 2^{nbits.bit_length() - 1}"
        raise ResourceLimit(f"{what} needs {size} bits, ceiling is {limit}")


def guard(value: int, what: str = "value") -> int:
    check_bits(value.bit_length(), what)
    return value


class PrimOp(enum.Enum):
    ADD = "add"
    MONUS = "monus"
    MUL = "mul"
    INTDIV = "intdiv"
    EXACTDIV = "exactdiv"
    SHL = "shl"
    SHR = "shr"
    AND = "and"
    OR = "or"
    XOR = "xor"
    BNOT = "bnot"
    CLR = "clr"

    @property
    def arity(self) -> int:
        return 1 if self is PrimOp.BNOT else 2

    @property
    def symbol(self) -> str:
        return _SYMBOLS[self]


_SYMBOLS = {
    PrimOp.ADD: "+",
    PrimOp.MONUS: "-.",
    PrimOp.MUL: "*",
    PrimOp.INTDIV: "//",
    PrimOp.EXACTDIV: "/",
    PrimOp.SHL: "<<",
    PrimOp.SHR: ">>",
    PrimOp.AND: "&",
    PrimOp.OR: "|",
    PrimOp.XOR: "^",
    PrimOp.BNOT: "~",
    PrimOp.CLR: "clr",
}

BOOL_OPS = frozenset({PrimOp.AND, PrimOp.OR, PrimOp.XOR, PrimOp.BNOT, PrimOp.CLR})


def _check_nat(*values: int) -> None:
    for v in values:
        if v < 0:
            raise ValueError(f"negative value {v} is not a natural number")


def bnot(a: int) -> int:
    """Flip the bits of ``a`` up to and including its MSB; ``bnot(0) == 0``."""
    return a ^ ((1 << a.bit_length()) - 1)


def set_fill(a: int) -> int:
    """SET(a) = a + ¬a, the all-ones number covering ``a``."""
    return a + bnot(a)


def clr(a: int, b: int) -> int:
    """``a`` with every bit that is set in ``b`` cleared."""
    return a & ~b


def monus(a: int, b: int) -> int:
    # a ^ a rather than a literal 0 keeps metered operands metered on both paths
    return a - b if a > b else a ^ a


def le_synth(a: int, b: int) -> bool:
    """``a <= b`` using only ``+``, tweaked ``¬``, ``∧``, ``∨`` and equality.

    Either the bit-lengths differ, which shows up as SET(a) ∨ SET(b) ≠ SET(a),
    or they agree and a + ¬b = SET(b) + (a - b) lands in [0, SET(b)] exactly
    when the bit at SET(b) + 1 is clear.
    """
    sa = a + bnot(a)
    sb = b + bnot(b)
    if (sa | sb) != sa:
        return True
    return sa == sb and ((a + bnot(b)) & (sb + 1)) == 0


def monus_synth(a: int, b: int) -> int:
    """Natural subtraction built from ``le_synth``, ``+``, ``¬`` and ``∧``."""
    if le_synth(a, b):
        return 0
    sa = a + bnot(a)
    return (a + bnot(b + sa)) & sa


def eval_prim(op: PrimOp, a: int, b: int = 0) -> int:
    """Evaluate one unit-cost operation, enforcing the bit ceiling.

    ``b`` is ignored for the unary ``bnot``.
    """
    _check_nat(a, b)
    if op is PrimOp.ADD:
        check_bits(max(a.bit_length(), b.bit_length()) + 1, "sum")
        return a + b
    if op is PrimOp.MONUS:
        return monus(a, b)
    if op is PrimOp.MUL:
        check_bits(a.bit_length() + b.bit_length(), "product")
        return a * b
    if op is PrimOp.INTDIV or op is PrimOp.EXACTDIV:
        if b == 0:
            raise DivisionByZero(f"{a} {op.symbol} 0")
        q, r = divmod(a, b)
        if op is PrimOp.EXACTDIV and r:
            raise InexactDivision(f"{b} does not divide {a}")
        return q
    if op is PrimOp.SHL:
        if a == 0:
            return 0
        check_bits(a.bit_length() + b, "shift result")
        return a << b
    if op is PrimOp.SHR:
        return a >> b
    if op is PrimOp.AND:
        return a & b
    if op is PrimOp.OR:
        return a | b
    if op is PrimOp.XOR:
        return a ^ b
    if op is PrimOp.BNOT:
        return bnot(a)
    if op is PrimOp.CLR:
        return clr(a, b)
    raise AssertionError(op)
