"""Bounded-tape binary Turing machines and their integer encodings.

An instantaneous description (ID) is the 5-tuple
``(tape, 2**headpos, state * 2**headpos, 1, 2**s)``.  Cell 0 is the tape's
least significant bit and the head starts there; moving right doubles the
head indicator.  Moving left from cell 0 stays put.  Trying to move right
from cell ``s-1`` leaves the head where it is and switches to a reserved,
absorbing *exceeded* state, the single state id ``1 << (c-1)``.  User states
therefore need ids below ``1 << (c-1)``.

:func:`compile_step_circuit` turns a machine into a straight-line program of
``and``/``or``/``xor`` and constant shifts that advances an ID by one step.
Because it never shifts by data and never uses a literal, the same program
advances every ID packed side by side in a vector.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from pelram.errors import RangeError

LEFT, RIGHT, STAY = "L", "R", "S"

ACCEPTED = "accepted"
REJECTED = "rejected"
NONTERMINATING = "nonterminating"
EXCEEDED_TAPE = "exceeded_tape"


def minimal_c(state_count: int) -> int:
    """Smallest state width that fits ``state_count`` user states plus the reserved bit."""
    return max(1, (state_count - 1).bit_length()) + 1


@dataclass(frozen=True)
class TmSpec:
    state_count: int
    transitions: Mapping[tuple[int, int], tuple[int, str, int]]
    accept_state: int
    reject_state: int
    c: int = 0

    def __post_init__(self):
        if self.c == 0:
            object.__setattr__(self, "c", minimal_c(self.state_count))
        if self.state_count < 1:
            raise ValueError("a machine needs at least one state")
        if self.state_count > 1 << (self.c - 1):
            raise ValueError(f"{self.state_count} states do not fit in c={self.c} "
                             "bits with the reserved exceeded bit")
        if self.accept_state == self.reject_state:
            raise ValueError("accept and reject states must differ")
        for q in (self.accept_state, self.reject_state):
            if not 0 <= q < self.state_count:
                raise ValueError(f"halting state {q} out of range")
        table = {}
        for (q, b), (b2, mv, q2) in self.transitions.items():
            if not (0 <= q < self.state_count and b in (0, 1) and b2 in (0, 1)
                    and mv in (LEFT, RIGHT, STAY) and 0 <= q2 < self.state_count):
                raise ValueError(f"bad transition {(q, b)} -> {(b2, mv, q2)}")
            if q not in self.halting:
                table[(q, b)] = (b2, mv, q2)
        for q in self.working_states:
            for b in (0, 1):
                if (q, b) not in table:
                    raise ValueError(f"transition table is missing ({q}, {b})")
        object.__setattr__(self, "transitions", table)

    @property
    def halting(self) -> frozenset[int]:
        return frozenset({self.accept_state, self.reject_state})

    @property
    def working_states(self) -> list[int]:
        return [q for q in range(self.state_count) if q not in self.halting]

    @property
    def exceeded_state(self) -> int:
        return 1 << (self.c - 1)

    def is_final(self, state: int) -> bool:
        return state in self.halting or state == self.exceeded_state

    def id_width(self, s: int) -> int:
        """Element width m = s + c - 1 of the tableau vectors."""
        return s + self.c - 1

    def id_bound(self, s: int) -> int:
        """B = 2^(3(s+c-1)), an upper bound on the number of distinct IDs."""
        return 1 << (3 * self.id_width(s))

    @classmethod
    def from_text(cls, text: str) -> "TmSpec":
        """Parse ``states N [c C] accept A reject R [tape-default 0]`` + ``q b -> q' b' M`` lines."""
        header = None
        transitions = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if header is None:
                toks = line.split()
                if len(toks) % 2 or toks[0] != "states":
                    raise ValueError(f"line {lineno}: expected TM header")
                header = dict(zip(toks[::2], toks[1::2]))
                unknown = set(header) - {"states", "c", "accept", "reject", "tape-default"}
                if unknown:
                    raise ValueError(f"line {lineno}: unknown header keys {sorted(unknown)}")
                if header.get("tape-default", "0") != "0":
                    raise ValueError(f"line {lineno}: only blank 0 is supported")
                continue
            m = re.fullmatch(r"(\d+)\s+([01])\s*->\s*(\d+)\s+([01])\s+([LRS])", line)
            if m is None:
                raise ValueError(f"line {lineno}: malformed transition {line!r}")
            q, b, q2, b2, mv = m.groups()
            key = (int(q), int(b))
            if key in transitions:
                raise ValueError(f"line {lineno}: duplicate transition for {key}")
            transitions[key] = (int(b2), mv, int(q2))
        if header is None:
            raise ValueError("empty TM description")
        return cls(int(header["states"]), transitions, int(header["accept"]),
                   int(header["reject"]), int(header.get("c", 0)))

    def to_text(self) -> str:
        lines = [f"states {self.state_count} c {self.c} accept {self.accept_state} "
                 f"reject {self.reject_state} tape-default 0"]
        for (q, b), (b2, mv, q2) in sorted(self.transitions.items()):
            lines.append(f"{q} {b} -> {q2} {b2} {mv}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class InstDesc:
    tape: int
    head_pow: int
    state_head: int
    low_end: int
    high_end: int

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.tape, self.head_pow, self.state_head, self.low_end, self.high_end)


def encode_id(spec: TmSpec, tape_bits: int, headpos: int, state: int, s: int) -> InstDesc:
    if not 0 <= headpos <= s:
        raise RangeError(f"head position {headpos} outside [0, {s}]")
    if not (0 <= state < spec.state_count or state == spec.exceeded_state):
        raise RangeError(f"state {state} is not a state of this machine")
    if not 0 <= tape_bits < 1 << s:
        raise RangeError(f"tape {tape_bits} does not fit in {s} cells")
    return InstDesc(tape_bits, 1 << headpos, state << headpos, 1, 1 << s)


def decode_id(d: InstDesc) -> tuple[int, int, int]:
    """Inverse of :func:`encode_id`: ``(tape, headpos, state)``."""
    h = d.head_pow
    if h <= 0 or h & (h - 1):
        raise RangeError("head indicator is not a power of two")
    headpos = h.bit_length() - 1
    if d.state_head & (h - 1):
        raise RangeError("state field is not aligned with the head")
    return d.tape, headpos, d.state_head >> headpos


def tm_step_reference(spec: TmSpec, d: InstDesc) -> InstDesc:
    """Advance one step by direct table lookup (the oracle for the circuit)."""
    tape, h, q = decode_id(d)
    s = d.high_end.bit_length() - 1
    if spec.is_final(q) or h >= s:
        return d
    write, move, nxt = spec.transitions[(q, (tape >> h) & 1)]
    tape = (tape & ~(1 << h)) | (write << h)
    if move == RIGHT:
        if h + 1 >= s:
            nxt = spec.exceeded_state
        else:
            h += 1
    elif move == LEFT and h > 0:
        h -= 1
    return InstDesc(tape, 1 << h, nxt << h, d.low_end, d.high_end)


def classify_state(spec: TmSpec, state: int) -> str:
    if state == spec.accept_state:
        return ACCEPTED
    if state == spec.reject_state:
        return REJECTED
    if state == spec.exceeded_state:
        return EXCEEDED_TAPE
    return NONTERMINATING


@dataclass(frozen=True)
class TmOutcome:
    kind: str
    steps: int


def run_tm_reference(spec: TmSpec, inp: int, s: int, max_steps: int) -> TmOutcome:
    """Run from the initial ID for at most ``max_steps`` steps.

    With ``max_steps >= spec.id_bound(s)`` a ``nonterminating`` outcome is a
    proof of an infinite loop, by pigeonhole over the possible IDs.
    """
    d = encode_id(spec, inp, 0, 0, s)
    steps = 0
    while steps < max_steps and not spec.is_final(decode_id(d)[2]):
        d = tm_step_reference(spec, d)
        steps += 1
    return TmOutcome(classify_state(spec, decode_id(d)[2]), steps)


# --- step circuit -----------------------------------------------------------

AND, OR, XOR, SHL, SHR = "and", "or", "xor", "shl", "shr"
INPUT_NAMES = ("tape", "head", "state_head", "low", "high")


@dataclass(frozen=True)
class CircuitOp:
    kind: str
    dest: int
    a: int
    b: int  # a wire for and/or/xor, a constant shift amount for shl/shr


@dataclass(frozen=True)
class StepCircuit:
    ops: tuple[CircuitOp, ...]
    outputs: tuple[int, int, int, int, int]
    wires: int = field(default=0)

    @property
    def constant_shift_bound(self) -> int:
        return max((op.b for op in self.ops if op.kind in (SHL, SHR)), default=0)

    def __call__(self, tape: int, head: int, state_head: int, low: int, high: int
                 ) -> tuple[int, int, int, int, int]:
        v = [0] * self.wires
        v[:5] = (tape, head, state_head, low, high)
        for op in self.ops:
            a = v[op.a]
            k = op.kind
            if k == AND:
                v[op.dest] = a & v[op.b]
            elif k == OR:
                v[op.dest] = a | v[op.b]
            elif k == XOR:
                v[op.dest] = a ^ v[op.b]
            elif k == SHL:
                v[op.dest] = a << op.b
            else:
                v[op.dest] = a >> op.b
        return tuple(v[i] for i in self.outputs)

    def apply(self, d: InstDesc) -> InstDesc:
        return InstDesc(*self(*d.as_tuple()))


class _Wires:
    def __init__(self):
        self.ops: list[CircuitOp] = []
        self.n = len(INPUT_NAMES)

    def _new(self, kind, a, b) -> int:
        dest = self.n
        self.n += 1
        self.ops.append(CircuitOp(kind, dest, a, b))
        return dest

    def and_(self, a, b):
        return self._new(AND, a, b)

    def xor(self, a, b):
        return self._new(XOR, a, b)

    def shl(self, a, k):
        return a if k == 0 else self._new(SHL, a, k)

    def shr(self, a, k):
        return a if k == 0 else self._new(SHR, a, k)

    def or_all(self, wires: Sequence[int], zero: int) -> int:
        if not wires:
            return zero
        acc = wires[0]
        for w in wires[1:]:
            acc = self._new(OR, acc, w)
        return acc

    def and_all(self, wires: Sequence[int]) -> int:
        acc = wires[0]
        for w in wires[1:]:
            acc = self.and_(acc, w)
        return acc

    def times_state(self, indicator: int, state: int, zero: int) -> int:
        """``state * indicator`` as an OR of shifted copies."""
        return self.or_all([self.shl(indicator, t) for t in range(state.bit_length())
                            if state >> t & 1], zero)


def compile_step_circuit(spec: TmSpec) -> StepCircuit:
    """Straight-line Bool/constant-shift program computing one TM step."""
    w = _Wires()
    T, H, S, LOW, HIGH = range(5)
    zero = w.xor(H, H)
    c = spec.c

    # bit t of the state, as an indicator at the head cell, and its complement
    q_bits = [w.and_(w.shr(S, t), H) for t in range(c)]
    q_nbits = [w.xor(qb, H) for qb in q_bits]
    read1 = w.and_(T, H)
    read0 = w.xor(read1, H)

    groups: dict[tuple[str, int], list[int]] = {}
    flips, active = [], []
    for q in spec.working_states:
        is_q = w.and_all([q_bits[t] if q >> t & 1 else q_nbits[t] for t in range(c)])
        for b, read in ((0, read0), (1, read1)):
            g = w.and_(is_q, read)
            write, move, nxt = spec.transitions[(q, b)]
            active.append(g)
            if write != b:
                flips.append(g)
            groups.setdefault((move, nxt), []).append(g)

    new_tape = w.xor(T, w.or_all(flips, zero))
    frozen = w.xor(H, w.or_all(active, zero))
    frozen_span = w.or_all([w.shl(frozen, t) for t in range(c)], zero)

    heads = [frozen]
    states = [w.and_(S, frozen_span)]
    for (move, nxt), gs in sorted(groups.items()):
        g = w.or_all(gs, zero)
        if move == STAY:
            heads.append(g)
            states.append(w.times_state(g, nxt, zero))
        elif move == LEFT:
            at_edge = w.and_(g, LOW)
            moved = w.shr(w.xor(g, at_edge), 1)
            nh = w._new(OR, moved, at_edge)
            heads.append(nh)
            states.append(w.times_state(nh, nxt, zero))
        else:
            up = w.shl(g, 1)
            off_tape = w.and_(up, HIGH)
            moved = w.xor(up, off_tape)
            stuck = w.shr(off_tape, 1)
            heads += [moved, stuck]
            states += [w.times_state(moved, nxt, zero),
                       w.shl(stuck, c - 1)]
    new_head = w.or_all(heads, zero)
    new_state = w.or_all(states, zero)
    return StepCircuit(tuple(w.ops), (new_tape, new_head, new_state, LOW, HIGH), w.n)


def circuit_is_pure(circuit: StepCircuit) -> bool:
    """True when only Bool ops and constant shifts occur (no add, no ¬, no literals)."""
    for op in circuit.ops:
        if op.kind not in (AND, OR, XOR, SHL, SHR):
            return False
        if op.kind in (SHL, SHR) and not isinstance(op.b, int):
            return False
        if op.kind not in (SHL, SHR) and not (0 <= op.b < op.dest and 0 <= op.a < op.dest):
            return False
    return True


def all_ids(spec: TmSpec, s: int) -> Iterable[InstDesc]:
    """Every ID with the head on the tape, over user states and the exceeded state."""
    states = list(range(spec.state_count)) + [spec.exceeded_state]
    for tape in range(1 << s):
        for h in range(s):
            for q in states:
                yield encode_id(spec, tape, h, q, s)
