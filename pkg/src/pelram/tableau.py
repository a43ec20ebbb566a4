"""Execution histories packed into integers, and their constant-time check.

A tableau stores the IDs of ``n`` consecutive steps as three encoded vectors
``T``, ``H`` and ``S`` of ``m = s + c - 1`` bit elements.  Running the step
circuit once over the packed vectors advances every row simultaneously, so
validity reduces to a handful of shifted-XOR identities.
"""

from __future__ import annotations

from dataclasses import dataclass

from pelram.errors import RangeError, ShapeError
from pelram.tm import (
    InstDesc, TmSpec, classify_state, compile_step_circuit,
    decode_id, encode_id, tm_step_reference,
)


def times_count(m: int, n: int) -> int:
    """``n * m``, as a shift when ``n`` is a power of two."""
    if n > 0 and n & (n - 1) == 0:
        return m << (n.bit_length() - 1)
    return n * m


def ones_vector(m: int, n: int) -> int:
    """The encoded vector whose ``n`` elements of width ``m`` are all 1."""
    return ((1 << times_count(m, n)) - 1) // ((1 << m) - 1) if m else 0


@dataclass(frozen=True)
class EncodedVector:
    m: int
    V: int
    n: int

    def __post_init__(self):
        if self.m < 1 or self.n < 0:
            raise ShapeError("encoded vectors need m >= 1 and n >= 0")
        if not 0 <= self.V < 1 << times_count(self.m, self.n):
            raise ShapeError(f"contents do not fit in {self.n} elements of {self.m} bits")

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(i)
        return (self.V >> (self.m * i)) & ((1 << self.m) - 1)

    def elements(self) -> list[int]:
        return [self[i] for i in range(self.n)]

    @classmethod
    def pack(cls, m: int, elements: list[int]) -> "EncodedVector":
        v = 0
        for i, e in enumerate(elements):
            if not 0 <= e < 1 << m:
                raise ShapeError(f"element {i} does not fit in {m} bits")
            v |= e << (m * i)
        return cls(m, v, len(elements))


@dataclass(frozen=True)
class Tableau:
    m: int
    T: int
    H: int
    S: int
    n: int
    s: int

    @property
    def I(self) -> int:  # noqa: E743 - the name matches the helper vector
        return ones_vector(self.m, self.n)

    @property
    def I_s(self) -> int:
        return self.I << self.s

    @property
    def bits(self) -> int:
        return times_count(self.m, self.n)

    def row(self, i: int) -> InstDesc:
        mask = (1 << self.m) - 1
        sh = self.m * i
        return InstDesc((self.T >> sh) & mask, (self.H >> sh) & mask,
                        (self.S >> sh) & mask, 1, 1 << self.s)

    def rows(self) -> list[InstDesc]:
        return [self.row(i) for i in range(self.n)]

    def composite(self) -> int:
        """``(T << 3wm) + (H << 2wm) + (S << wm) + I``, one element of a tableau map."""
        wm = self.bits
        return (self.T << 3 * wm) + (self.H << 2 * wm) + (self.S << wm) + self.I

    def reversed_rows(self) -> "Tableau":
        """Same history with row order flipped (initial ID on top)."""
        rows = self.rows()[::-1]
        return _pack_rows(rows, self.m, self.s)

    def with_bit_flipped(self, field: str, bit: int) -> "Tableau":
        if field not in ("T", "H", "S"):
            raise ValueError(f"unknown field {field!r}")
        vals = {"T": self.T, "H": self.H, "S": self.S}
        vals[field] ^= 1 << bit
        return Tableau(self.m, vals["T"], vals["H"], vals["S"], self.n, self.s)

    def dump(self) -> str:
        """Length-prefixed hex of (m, n, s, T, H, S)."""
        parts = []
        for v in (self.m, self.n, self.s, self.T, self.H, self.S):
            h = format(v, "x")
            parts.append(f"{len(h)}:{h}")
        return "".join(parts)

    @classmethod
    def restore(cls, text: str) -> "Tableau":
        text = "".join(text.split())
        vals = []
        pos = 0
        for name in ("m", "n", "s", "T", "H", "S"):
            colon = text.find(":", pos)
            if colon < 0:
                raise ShapeError(f"truncated tableau dump: missing field {name}")
            try:
                size = int(text[pos:colon])
            except ValueError:
                raise ShapeError(f"bad length prefix for field {name}") from None
            body = text[colon + 1:colon + 1 + size]
            if len(body) != size:
                raise ShapeError(f"truncated tableau dump in field {name}")
            vals.append(int(body, 16))
            pos = colon + 1 + size
        if pos != len(text):
            raise ShapeError("trailing data after tableau dump")
        m, n, s, T, H, S = vals
        if m < 1 or n < 1:
            raise ShapeError("tableau needs m >= 1 and n >= 1")
        return cls(m, T, H, S, n, s)


def _pack_rows(rows: list[InstDesc], m: int, s: int) -> Tableau:
    T = H = S = 0
    for i, d in enumerate(rows):
        T |= d.tape << (m * i)
        H |= d.head_pow << (m * i)
        S |= d.state_head << (m * i)
    return Tableau(m, T, H, S, len(rows), s)


def build_tableau(spec: TmSpec, inp: int, s: int, n: int) -> Tableau:
    if n < 1:
        raise RangeError("a tableau needs at least one row")
    d = encode_id(spec, inp, 0, 0, s)
    rows = [d]
    for _ in range(n - 1):
        d = tm_step_reference(spec, d)
        rows.append(d)
    return _pack_rows(rows, spec.id_width(s), s)


@dataclass(frozen=True)
class VerifyStatus:
    valid: bool
    terminal: str | None = None

    def __str__(self) -> str:
        return f"valid, {self.terminal}" if self.valid else "invalid"


def classify_terminal(last_row: InstDesc, spec: TmSpec) -> str:
    """accepted / rejected / exceeded_tape / nonterminating, read off one ID."""
    return classify_state(spec, decode_id(last_row)[2])


def tableau_residues(t: Tableau, spec: TmSpec, inp: int) -> dict[str, int]:
    """Each checked identity as a residue that is zero exactly when it holds."""
    step = compile_step_circuit(spec)
    m, nm = t.m, t.bits
    full = (1 << nm) - 1
    I = t.I
    T2, H2, S2, _, _ = step(t.T, t.H, t.S, I, t.I_s)
    return {
        "T": (((T2 << m) ^ t.T) & full) ^ inp,
        "H": (((H2 << m) ^ t.H) & full) ^ 1,
        "S": ((S2 << m) ^ t.S) & full,
        "I": ((I << m) ^ I) ^ ((1 << nm) + 1),
        "I_s": t.I_s ^ (I << t.s),
        "range": (t.T | t.H | t.S) >> nm,
    }


def verify_tableau(t: Tableau, spec: TmSpec, inp: int) -> VerifyStatus:
    if t.m != spec.id_width(t.s):
        return VerifyStatus(False)
    if any(tableau_residues(t, spec, inp).values()):
        return VerifyStatus(False)
    return VerifyStatus(True, classify_terminal(t.row(t.n - 1), spec))

