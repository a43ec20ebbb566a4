"""Exception hierarchy shared by every module in the package."""

from __future__ import annotations


class PelramError(Exception):
    """Base class for all package errors."""


class ResourceLimit(PelramError):
    """A value would exceed the configured bit-length ceiling."""


class DivisionByZero(PelramError, ZeroDivisionError):
    pass


class InexactDivision(PelramError, ArithmeticError):
    """Exact division ``a / b`` attempted with ``b`` not dividing ``a``."""


class RandZero(PelramError):
    """``RAND(0)`` has an empty range."""


class TapeExhausted(PelramError):
    """An oracle tape ran out of bits."""


class PolicyViolation(PelramError):
    """A program uses an operation its declared op-set forbids."""


class AssemblySyntaxError(PelramError, SyntaxError):
    def __init__(self, msg: str, lineno: int | None = None):
        self.msg = msg
        self.lineno = lineno
        text = f"line {lineno}: {msg}" if lineno is not None else msg
        PelramError.__init__(self, text)

    def __str__(self) -> str:
        if self.lineno is None:
            return self.msg
        return f"line {self.lineno}: {self.msg}"


class TransformInapplicable(PelramError):
    """A program rewrite's preconditions do not hold."""


class RangeError(PelramError, ValueError):
    pass


class ShapeError(PelramError, ValueError):
    """Structural mismatch between encoded objects (widths, lengths, dumps)."""
