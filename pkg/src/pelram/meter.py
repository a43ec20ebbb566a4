"""Unit-cost accounting for library code written with ordinary int operators.

Wrapping the inputs of a computation in :class:`MNat` makes every ``+ - & |
^ << >>`` on the derived values count as one step of the active
:class:`OpMeter`, which is how the driver's cost shape is measured without
translating it into RAM assembly.
"""

from __future__ import annotations

from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from typing import Iterator

from pelram.natnum import check_bits

_active: ContextVar["OpMeter | None"] = ContextVar("pelram_meter", default=None)


@dataclass
class OpMeter:
    ops: int = 0

    def tick(self, n: int = 1) -> None:
        self.ops += n


def tick(n: int = 1) -> None:
    """Charge ``n`` steps (branches, loop tests) to the active meter, if any."""
    m = _active.get()
    if m is not None:
        m.ops += n


@contextmanager
def metered() -> Iterator[OpMeter]:
    m = OpMeter()
    token = _active.set(m)
    try:
        yield m
    finally:
        _active.reset(token)


def _counted(value: int) -> "MNat":
    m = _active.get()
    if m is not None:
        m.ops += 1
    return MNat(value)


class MNat(int):
    """An int whose arithmetic and Boolean operators are charged to the meter."""

    __slots__ = ()

    def __add__(self, o):
        return _counted(int.__add__(self, o))

    def __radd__(self, o):
        return _counted(int.__radd__(self, o))

    def __sub__(self, o):
        return _counted(int.__sub__(self, o))

    def __rsub__(self, o):
        return _counted(int.__rsub__(self, o))

    def __and__(self, o):
        return _counted(int.__and__(self, o))

    __rand__ = __and__

    def __or__(self, o):
        return _counted(int.__or__(self, o))

    __ror__ = __or__

    def __xor__(self, o):
        return _counted(int.__xor__(self, o))

    __rxor__ = __xor__

    def __lshift__(self, o):
        if self:
            check_bits(self.bit_length() + o, "shift result")
        return _counted(int.__lshift__(self, o))

    def __rlshift__(self, o):
        if o:
            check_bits(int(o).bit_length() + self, "shift result")
        return _counted(int.__rlshift__(self, o))

    def __rshift__(self, o):
        return _counted(int.__rshift__(self, o))

    def __rrshift__(self, o):
        return _counted(int.__rrshift__(self, o))

    def __invert__(self):
        # only ever used inside ``a & ~b`` (clr), which the ``&`` already pays for
        return MNat(int.__invert__(self))
