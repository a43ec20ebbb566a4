"""Line-oriented assembly for RAM programs.

Grammar, one statement per line (``#`` starts a comment)::

    op +,<<,bool,rand2        policy header (tokens: + -. * / // << >> bool rand2 rand)
    loop:                     label, may prefix a statement on the same line
    R1 <= R0 & 1              binary op: + -. * / // << >> & | ^ clr
    R2 <= ~R1                 tweaked negation
    R@3 <= R1                 assignment; R@n is indirect through R[n]
    R4 <= rand2(R1)           RAND(2^R1)
    R4 <= rand(R2)            RAND(R2)
    jmp loop
    beq R1 0 loop             branch if equal
    ble R1 R2 loop            branch if <=, lowered to an equality-only sequence
    accept | reject | halt

Only 0 and 1 may appear as literal operands.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from pelram.errors import AssemblySyntaxError, PolicyViolation
from pelram.natnum import BOOL_OPS, PrimOp
from pelram.ram.program import (
    LIT, ONE, RAND_GENERAL, RAND_NONE, RAND_POW2, ZERO, Instruction,
    Opcode, Operand, OpSetPolicy, Program, ind, lit, reg,
)

_HEADER_OPS = {
    "+": {PrimOp.ADD},
    "-.": {PrimOp.MONUS},
    "*": {PrimOp.MUL},
    "/": {PrimOp.EXACTDIV},
    "//": {PrimOp.INTDIV},
    "<<": {PrimOp.SHL},
    ">>": {PrimOp.SHR},
    "bool": set(BOOL_OPS),
}

_BINOPS = {op.symbol: op for op in PrimOp if op.arity == 2}

_TOKEN = re.compile(r"\s*(R@\d+|R\d+|\d+|-\.|//|<<|>>|<=|[A-Za-z_.][\w.]*|\S)")
_LABEL = re.compile(r"^([A-Za-z_.][\w.]*)\s*:")


def _tokenize(text: str, lineno: int) -> list[str]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # pragma: no cover - the regex matches any non-space
            raise AssemblySyntaxError(f"cannot tokenize {text[pos:]!r}", lineno)
        tokens.append(m.group(1))
        pos = m.end()
    return tokens


def _operand(tok: str, lineno: int) -> Operand:
    if tok.startswith("R@"):
        return ind(int(tok[2:]))
    if tok.startswith("R") and tok[1:].isdigit():
        return reg(int(tok[1:]))
    if tok.isdigit():
        if tok not in ("0", "1"):
            raise AssemblySyntaxError(f"literal {tok} not allowed; constants must be 0 or 1", lineno)
        return lit(int(tok))
    raise AssemblySyntaxError(f"expected operand, got {tok!r}", lineno)


def _parse_header(tokens: list[str], lineno: int) -> OpSetPolicy:
    allowed: set[PrimOp] = set()
    rand_mode = RAND_NONE
    for tok in "".join(tokens[1:]).split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok in _HEADER_OPS:
            allowed |= _HEADER_OPS[tok]
        elif tok == "rand2":
            if rand_mode == RAND_NONE:
                rand_mode = RAND_POW2
        elif tok == "rand":
            rand_mode = RAND_GENERAL
        else:
            raise AssemblySyntaxError(f"unknown op-set token {tok!r}", lineno)
    return OpSetPolicy(frozenset(allowed), rand_mode)


@dataclass
class _Pending:
    ins: Instruction
    label: str | None = None  # symbolic branch target


class _Builder:
    def __init__(self, policy: OpSetPolicy):
        self.policy = policy
        self.items: list[_Pending] = []
        self.labels: dict[str, int] = {}
        self.label_lines: dict[str, int] = {}
        self._gensym = 0

    def here(self) -> int:
        return len(self.items)

    def define(self, name: str, lineno: int) -> None:
        if name in self.labels:
            raise AssemblySyntaxError(f"duplicate label {name!r}", lineno)
        self.labels[name] = self.here()
        self.label_lines[name] = lineno

    def emit(self, ins: Instruction, label: str | None = None) -> None:
        self.items.append(_Pending(ins, label))

    def fresh(self, stem: str) -> str:
        self._gensym += 1
        return f".{stem}{self._gensym}"

    def check_policy(self, ins: Instruction, lineno: int) -> None:
        if ins.op is Opcode.PRIM and not self.policy.permits(ins.prim):
            raise PolicyViolation(f"line {lineno}: opcode {ins.prim.symbol!r} not in op-set")
        if ins.op is Opcode.RAND2 and self.policy.rand_mode == RAND_NONE:
            raise PolicyViolation(f"line {lineno}: rand2 not in op-set")
        if ins.op is Opcode.RAND and self.policy.rand_mode != RAND_GENERAL:
            raise PolicyViolation(f"line {lineno}: rand not in op-set")

    def finish(self) -> Program:
        out = []
        for idx, p in enumerate(self.items):
            ins = p.ins
            if p.label is not None:
                if p.label not in self.labels:
                    raise AssemblySyntaxError(f"undefined label {p.label!r}", ins.line)
                ins = ins.retarget(self.labels[p.label])
            out.append(ins)
        public = {k: v for k, v in self.labels.items() if not k.startswith(".")}
        return Program(tuple(out), self.policy, public)


def _lower_ble(b: _Builder, x: Operand, y: Operand, label: str, scratch: int, lineno: int) -> None:
    """Emit ``if x <= y goto label`` using only ~, +, |, & and equality tests."""
    sa, sb, t = reg(scratch), reg(scratch + 1), reg(scratch + 2)
    cont, eq_case, after = b.fresh("ble_cont"), b.fresh("ble_eq"), b.fresh("ble_end")

    def prim(op, d, *a):
        b.emit(Instruction(Opcode.PRIM, d, a, op, line=lineno))

    def at(name):
        b.labels[name] = b.here()

    prim(PrimOp.BNOT, sa, x)
    prim(PrimOp.ADD, sa, x, sa)          # SET(x)
    prim(PrimOp.BNOT, sb, y)
    prim(PrimOp.ADD, sb, y, sb)          # SET(y)
    prim(PrimOp.OR, t, sa, sb)
    b.emit(Instruction(Opcode.BEQ, None, (t, sa), line=lineno), cont)
    b.emit(Instruction(Opcode.JUMP, line=lineno), label)   # shorter bit-length
    at(cont)
    b.emit(Instruction(Opcode.BEQ, None, (sa, sb), line=lineno), eq_case)
    b.emit(Instruction(Opcode.JUMP, line=lineno), after)
    at(eq_case)
    prim(PrimOp.BNOT, t, y)
    prim(PrimOp.ADD, t, x, t)            # SET(y) + (x - y)
    prim(PrimOp.ADD, sb, sb, ONE)
    prim(PrimOp.AND, t, t, sb)
    b.emit(Instruction(Opcode.BEQ, None, (t, ZERO), line=lineno), label)
    at(after)


def _max_register_in_source(lines: list[tuple[int, list[str]]]) -> int:
    hi = -1
    for _, toks in lines:
        for tok in toks:
            m = re.fullmatch(r"R@?(\d+)", tok)
            if m:
                hi = max(hi, int(m.group(1)))
    return hi


def parse_program(text: str, policy: OpSetPolicy | None = None) -> Program:
    """Assemble ``text`` into a Program, checking every opcode against the op-set.

    The ``op`` header, if present, must precede all statements; ``policy``
    is used when there is none (default: the core +, <<, Bool set).
    """
    lines: list[tuple[int, list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            lines.append((lineno, body))
    header = None
    if lines and re.match(r"op(\s|$)", lines[0][1]):
        header = lines.pop(0)
    tokenized = []
    for lineno, body in lines:
        labels = []
        while True:
            m = _LABEL.match(body)
            if not m:
                break
            labels.append(m.group(1))
            body = body[m.end():].strip()
        tokenized.append((lineno, labels, _tokenize(body, lineno)))

    if header is not None:
        pol = _parse_header(_tokenize(header[1], header[0]), header[0])
    else:
        pol = policy if policy is not None else OpSetPolicy()
    scratch = _max_register_in_source([(ln, toks) for ln, _, toks in tokenized]) + 1
    b = _Builder(pol)

    for lineno, labels, toks in tokenized:
        for name in labels:
            b.define(name, lineno)
        if not toks:
            continue
        if toks[0] == "op":
            raise AssemblySyntaxError("op header must come first", lineno)
        _statement(b, toks, lineno, scratch)
    return b.finish()


def _statement(b: _Builder, toks: list[str], lineno: int, scratch: int) -> None:
    head = toks[0]

    def need(n):
        if len(toks) != n:
            raise AssemblySyntaxError(f"malformed {head!r} statement", lineno)

    if head in ("accept", "reject", "halt"):
        need(1)
        op = {"accept": Opcode.ACCEPT, "reject": Opcode.REJECT, "halt": Opcode.HALT}[head]
        b.emit(Instruction(op, line=lineno))
        return
    if head == "jmp":
        need(2)
        b.emit(Instruction(Opcode.JUMP, line=lineno), toks[1])
        return
    if head in ("beq", "ble"):
        need(4)
        x, y = _operand(toks[1], lineno), _operand(toks[2], lineno)
        if head == "beq":
            b.emit(Instruction(Opcode.BEQ, None, (x, y), line=lineno), toks[3])
        else:
            _lower_ble(b, x, y, toks[3], scratch, lineno)
        return

    if len(toks) < 3 or toks[1] != "<=":
        raise AssemblySyntaxError(f"unrecognised statement starting {head!r}", lineno)
    dest = _operand(head, lineno)
    if dest.kind == LIT:
        raise AssemblySyntaxError("cannot assign to a literal", lineno)
    rhs = toks[2:]
    if rhs[0] in ("rand2", "rand"):
        if len(rhs) != 4 or rhs[1] != "(" or rhs[3] != ")":
            raise AssemblySyntaxError(f"expected {rhs[0]}(operand)", lineno)
        op = Opcode.RAND2 if rhs[0] == "rand2" else Opcode.RAND
        ins = Instruction(op, dest, (_operand(rhs[2], lineno),), line=lineno)
    elif rhs[0] == "~":
        if len(rhs) != 2:
            raise AssemblySyntaxError("expected ~operand", lineno)
        ins = Instruction(Opcode.PRIM, dest, (_operand(rhs[1], lineno),), PrimOp.BNOT, line=lineno)
    elif len(rhs) == 1:
        ins = Instruction(Opcode.ASSIGN, dest, (_operand(rhs[0], lineno),), line=lineno)
    elif len(rhs) == 3:
        if rhs[1] not in _BINOPS:
            raise AssemblySyntaxError(f"unknown operator {rhs[1]!r}", lineno)
        ins = Instruction(Opcode.PRIM, dest,
                          (_operand(rhs[0], lineno), _operand(rhs[2], lineno)),
                          _BINOPS[rhs[1]], line=lineno)
    else:
        raise AssemblySyntaxError("malformed expression", lineno)
    b.check_policy(ins, lineno)
    b.emit(ins)


def format_policy(policy: OpSetPolicy) -> str:
    toks = ["+", "<<", "bool"]
    for tok in ("-.", "*", "/", "//", ">>"):
        (op,) = _HEADER_OPS[tok]
        if policy.permits(op):
            toks.append(tok)
    if policy.rand_mode == RAND_POW2:
        toks.append("rand2")
    elif policy.rand_mode == RAND_GENERAL:
        toks += ["rand2", "rand"]
    return "op " + ",".join(toks)


def format_program(program: Program) -> str:
    """Render ``program`` as assembly; ``parse_program`` reads it back to an equal Program."""
    targets = {ins.target for ins in program.instructions if ins.target is not None}
    names = {t: f"L{t}" for t in targets}
    out = [format_policy(program.policy)]
    for idx, ins in enumerate(program.instructions):
        prefix = f"{names[idx]}: " if idx in names else ""
        out.append(prefix + _format_ins(ins, names))
    n = len(program.instructions)
    if n in names:
        out.append(f"{names[n]}:")
    return "\n".join(out) + "\n"


def _format_ins(ins: Instruction, names: dict[int, str]) -> str:
    op = ins.op
    if op is Opcode.ACCEPT:
        return "accept"
    if op is Opcode.REJECT:
        return "reject"
    if op is Opcode.HALT:
        return "halt"
    if op is Opcode.JUMP:
        return f"jmp {names[ins.target]}"
    if op is Opcode.BEQ:
        return f"beq {ins.args[0]} {ins.args[1]} {names[ins.target]}"
    if op is Opcode.RAND2:
        return f"{ins.dest} <= rand2({ins.args[0]})"
    if op is Opcode.RAND:
        return f"{ins.dest} <= rand({ins.args[0]})"
    if op is Opcode.ASSIGN:
        return f"{ins.dest} <= {ins.args[0]}"
    if ins.prim is PrimOp.BNOT:
        return f"{ins.dest} <= ~{ins.args[0]}"
    return f"{ins.dest} <= {ins.args[0]} {ins.prim.symbol} {ins.args[1]}"

