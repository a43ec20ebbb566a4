"""Instruction set and program container for the RAM[op] machine."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from pelram.natnum import BOOL_OPS, PrimOp

CORE_OPS = frozenset({PrimOp.ADD, PrimOp.SHL}) | BOOL_OPS

RAND_NONE = "none"
RAND_POW2 = "rand_pow2"
RAND_GENERAL = "rand_general"
RAND_MODES = (RAND_NONE, RAND_POW2, RAND_GENERAL)


@dataclass(frozen=True)
class OpSetPolicy:
    allowed: frozenset[PrimOp] = CORE_OPS
    rand_mode: str = RAND_NONE

    def __post_init__(self):
        # +, <<, Bool are never optional
        object.__setattr__(self, "allowed", frozenset(self.allowed) | CORE_OPS)
        if self.rand_mode not in RAND_MODES:
            raise ValueError(f"unknown rand mode {self.rand_mode!r}")

    def permits(self, op: PrimOp) -> bool:
        return op in self.allowed

    def with_ops(self, *ops: PrimOp, rand_mode: str | None = None) -> "OpSetPolicy":
        return OpSetPolicy(self.allowed | frozenset(ops),
                           self.rand_mode if rand_mode is None else rand_mode)


class Opcode(enum.Enum):
    PRIM = "prim"
    ASSIGN = "assign"
    JUMP = "jump"
    BEQ = "branch_eq"
    RAND2 = "rand_pow2"
    RAND = "rand_general"
    HALT = "halt"
    ACCEPT = "halt_accept"
    REJECT = "halt_reject"


LIT, DIRECT, INDIRECT = "lit", "dir", "ind"


@dataclass(frozen=True)
class Operand:
    kind: str
    value: int

    def __post_init__(self):
        if self.kind == LIT and self.value not in (0, 1):
            raise ValueError("literal operands must be 0 or 1")

    def __str__(self) -> str:
        if self.kind == LIT:
            return str(self.value)
        return f"R{'@' if self.kind == INDIRECT else ''}{self.value}"

    @property
    def is_register(self) -> bool:
        return self.kind != LIT


def lit(v: int) -> Operand:
    return Operand(LIT, v)


def reg(i: int) -> Operand:
    return Operand(DIRECT, i)


def ind(i: int) -> Operand:
    return Operand(INDIRECT, i)


ZERO, ONE = lit(0), lit(1)


@dataclass(frozen=True)
class Instruction:
    op: Opcode
    dest: Operand | None = None
    args: tuple[Operand, ...] = ()
    prim: PrimOp | None = None
    target: int | None = None
    line: int | None = None

    def operands(self) -> tuple[Operand, ...]:
        return ((self.dest,) if self.dest is not None else ()) + self.args

    def retarget(self, target: int) -> "Instruction":
        return Instruction(self.op, self.dest, self.args, self.prim, target, self.line)


@dataclass(frozen=True)
class Program:
    instructions: tuple[Instruction, ...]
    policy: OpSetPolicy = field(default_factory=OpSetPolicy)
    labels: dict[str, int] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        n = len(self.instructions)
        for idx, ins in enumerate(self.instructions):
            if ins.target is not None and not 0 <= ins.target <= n:
                raise ValueError(f"instruction {idx}: branch target {ins.target} out of range")

    def __len__(self) -> int:
        return len(self.instructions)

    @property
    def uses_indirect(self) -> bool:
        return any(o.kind == INDIRECT for ins in self.instructions for o in ins.operands())

    @property
    def max_static_register(self) -> int | None:
        """Highest register index named anywhere (None when indirect addressing is used)."""
        if self.uses_indirect:
            return None
        return self.highest_register_named()

    def highest_register_named(self) -> int:
        idx = [o.value for ins in self.instructions for o in ins.operands() if o.is_register]
        return max(idx, default=0)

    def prim_ops(self) -> set[PrimOp]:
        return {ins.prim for ins in self.instructions if ins.op is Opcode.PRIM}
