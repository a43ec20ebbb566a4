"""Rewrite a RAM program so it never uses ``>>``.

Every simulated register ``R[i]`` is kept multiplied by a common power of two
held in a scale register ``R[k+1]``.  A right shift then becomes a left shift
of *every other* register (and of the scale) followed by truncation of the
destination below the new scale.  Shift amounts must be true, unscaled
values, so a shadow copy of each register that never depends on ``>>`` runs
alongside and supplies them.
"""

from __future__ import annotations

from dataclasses import dataclass

from pelram.errors import TransformInapplicable
from pelram.natnum import PrimOp
from pelram.ram.program import (
    LIT, Instruction, Opcode, Operand, Program, reg,
)

_LINEAR = {PrimOp.ADD, PrimOp.MONUS, PrimOp.AND, PrimOp.OR, PrimOp.XOR, PrimOp.CLR}
_UNSCALABLE = {PrimOp.MUL, PrimOp.INTDIV, PrimOp.EXACTDIV}


@dataclass(frozen=True)
class ShiftFreeProgram:
    program: Program
    pc_map: tuple[int, ...]     # original pc -> first pc of its translation
    scale_register: int
    registers: int              # original registers are R0 .. R[registers-1]


def shr_tainted(p: Program) -> set[int]:
    """Registers whose value may (flow-insensitively) derive from a ``>>`` result."""
    tainted: set[int] = set()
    changed = True
    while changed:
        changed = False
        for ins in p.instructions:
            if ins.dest is None:
                continue
            d = ins.dest.value
            if d in tainted:
                continue
            if (ins.op is Opcode.PRIM and ins.prim is PrimOp.SHR) or any(
                    a.is_register and a.value in tainted for a in ins.args):
                tainted.add(d)
                changed = True
    return tainted


def _check(p: Program, tainted: set[int]) -> None:
    if p.uses_indirect:
        raise TransformInapplicable("indirect addressing present")
    for idx, ins in enumerate(p.instructions):
        if ins.op is Opcode.RAND:
            raise TransformInapplicable(f"instruction {idx}: rand(y) cannot be rescaled")
        if ins.op is Opcode.PRIM and ins.prim in _UNSCALABLE:
            raise TransformInapplicable(f"instruction {idx}: {ins.prim.symbol} cannot be rescaled")
        amount = None
        if ins.op is Opcode.PRIM and ins.prim in (PrimOp.SHL, PrimOp.SHR):
            amount = ins.args[1]
        elif ins.op is Opcode.RAND2:
            amount = ins.args[0]
        if amount is not None and amount.is_register and amount.value in tainted:
            raise TransformInapplicable(
                f"instruction {idx}: shift amount R{amount.value} depends on >>")


def eliminate_right_shifts_detailed(p: Program) -> ShiftFreeProgram:
    tainted = shr_tainted(p)
    _check(p, tainted)
    k = p.highest_register_named()
    n = len(p.instructions)
    if not any(ins.op is Opcode.PRIM and ins.prim is PrimOp.SHR for ins in p.instructions):
        return ShiftFreeProgram(p, tuple(range(n + 1)), k + 1, k + 1)

    scale = reg(k + 1)
    tmp = reg(2 * k + 3)
    exponent = reg(2 * k + 4)
    drawn = reg(2 * k + 5)
    needs_exponent = any(ins.op is Opcode.RAND2 for ins in p.instructions)

    def shadow(o: Operand) -> Operand:
        return o if o.kind == LIT else reg(k + 2 + o.value)

    def scaled(o: Operand) -> Operand:
        return scale if o.kind == LIT and o.value == 1 else o

    def prim(op, d, *args):
        return Instruction(Opcode.PRIM, d, tuple(args), op)

    prologue = [Instruction(Opcode.ASSIGN, scale, (Operand(LIT, 1),)),
                Instruction(Opcode.ASSIGN, shadow(reg(0)), (reg(0),))]
    blocks: list[list[Instruction]] = []
    for ins in p.instructions:
        out: list[Instruction] = []
        d = ins.dest
        keep_shadow = d is not None and d.value not in tainted
        if ins.op is Opcode.PRIM and ins.prim in _LINEAR:
            a, b = ins.args
            if keep_shadow:
                out.append(prim(ins.prim, shadow(d), shadow(a), shadow(b)))
            out.append(prim(ins.prim, d, scaled(a), scaled(b)))
        elif ins.op is Opcode.PRIM and ins.prim is PrimOp.BNOT:
            # ~(a*S) = ~a*S + (S-1); clear the bits below the scale again
            (a,) = ins.args
            if keep_shadow:
                out.append(prim(PrimOp.BNOT, shadow(d), shadow(a)))
            out += [prim(PrimOp.BNOT, tmp, scale),
                    prim(PrimOp.BNOT, d, scaled(a)),
                    prim(PrimOp.CLR, d, d, tmp)]
        elif ins.op is Opcode.PRIM and ins.prim is PrimOp.SHL:
            a, x = ins.args
            if keep_shadow:
                out.append(prim(PrimOp.SHL, shadow(d), shadow(a), shadow(x)))
            out.append(prim(PrimOp.SHL, d, scaled(a), shadow(x)))
        elif ins.op is Opcode.PRIM and ins.prim is PrimOp.SHR:
            a, x = ins.args
            amount = shadow(x)
            out.append(Instruction(Opcode.ASSIGN, d, (scaled(a),)))
            for r in list(range(k + 1)) + [k + 1]:
                if r != d.value:
                    out.append(prim(PrimOp.SHL, reg(r), reg(r), amount))
            out += [prim(PrimOp.BNOT, tmp, scale),
                    prim(PrimOp.CLR, d, d, tmp)]
            if needs_exponent:
                out.append(prim(PrimOp.ADD, exponent, exponent, amount))
        elif ins.op is Opcode.ASSIGN:
            (a,) = ins.args
            if keep_shadow:
                out.append(Instruction(Opcode.ASSIGN, shadow(d), (shadow(a),)))
            out.append(Instruction(Opcode.ASSIGN, d, (scaled(a),)))
        elif ins.op is Opcode.BEQ:
            out.append(Instruction(Opcode.BEQ, None, tuple(scaled(a) for a in ins.args),
                                   target=ins.target))
        elif ins.op is Opcode.RAND2:
            out.append(Instruction(Opcode.RAND2, drawn, (shadow(ins.args[0]),)))
            if keep_shadow:
                out.append(Instruction(Opcode.ASSIGN, shadow(d), (drawn,)))
            out.append(prim(PrimOp.SHL, d, drawn, exponent))
        else:  # jumps and halts carry over unchanged
            out.append(ins)
        blocks.append(out)

    starts = []
    pos = len(prologue)
    for blk in blocks:
        starts.append(pos)
        pos += len(blk)
    starts.append(pos)
    body = list(prologue)
    for blk in blocks:
        for ins in blk:
            body.append(ins.retarget(starts[ins.target]) if ins.target is not None else ins)
    policy = type(p.policy)(p.policy.allowed - {PrimOp.SHR}, p.policy.rand_mode)
    return ShiftFreeProgram(Program(tuple(body), policy), tuple(starts), k + 1, k + 1)


def eliminate_right_shifts(p: Program) -> Program:
    """Equivalent program (same accept/reject behaviour) that uses no ``>>``.

    Raises TransformInapplicable when ``p`` uses indirect addressing, an
    operation that does not commute with scaling (``*``, ``/``, ``//``,
    ``rand``), or a shift amount that itself depends on ``>>``.
    """
    return eliminate_right_shifts_detailed(p).program
