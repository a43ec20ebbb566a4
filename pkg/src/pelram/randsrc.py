"""Sources of randomness for RAND pseudofunctions.

Two kinds exist: a seeded PRNG, and an *oracle tape*, an explicit bit string
that is read LSB-first, ``k`` bits per ``RAND(2^k)`` call.  Oracle tapes let
tests drive probabilistic code down a chosen path.
"""

from __future__ import annotations

import random
from typing import Iterable

from pelram.errors import RandZero, TapeExhausted
from pelram.natnum import check_bits


class RandomSource:
    """Stateful bit supplier.  Not thread-safe: use one per thread."""

    def __init__(self, *, seed: int | None = None, tape: str | None = None,
                 tape_int: int | None = None, tape_len: int | None = None):
        if tape is not None and tape_int is not None:
            raise ValueError("give tape text or tape_int, not both")
        self.seed = seed
        self.cursor = 0
        if tape is not None:
            bits = "".join(ch for ch in tape if not ch.isspace())
            if bits.strip("01"):
                raise ValueError("oracle tape may only contain '0' and '1'")
            self.kind = "oracle_tape"
            # bit i of the tape is character i
            self._tape = int(bits[::-1], 2) if bits else 0
            self._len = len(bits)
        elif tape_int is not None:
            if tape_len is None:
                raise ValueError("tape_len is required with tape_int")
            self.kind = "oracle_tape"
            self._tape = tape_int
            self._len = tape_len
        else:
            self.kind = "seeded_prng"
            self._rng = random.Random(seed)

    @classmethod
    def seeded(cls, seed: int | None) -> "RandomSource":
        return cls(seed=seed)

    @classmethod
    def from_tape(cls, text: str) -> "RandomSource":
        return cls(tape=text)

    @classmethod
    def from_values(cls, draws: Iterable[tuple[int, int]]) -> "RandomSource":
        """Tape holding each ``(value, k)`` as one ``RAND(2^k)`` result, in order."""
        acc = 0
        pos = 0
        for value, k in draws:
            if value >> k:
                raise ValueError(f"{value} does not fit in {k} bits")
            acc |= value << pos
            pos += k
        return cls(tape_int=acc, tape_len=pos)

    @property
    def is_oracle(self) -> bool:
        return self.kind == "oracle_tape"

    @property
    def remaining(self) -> int | None:
        return self._len - self.cursor if self.is_oracle else None

    def tape_text(self) -> str:
        if not self.is_oracle:
            raise TypeError("not an oracle tape")
        return "".join("1" if (self._tape >> i) & 1 else "0" for i in range(self._len))

    def bits(self, k: int) -> int:
        """RAND(2^k): a uniform integer in [0, 2^k)."""
        if k < 0:
            raise ValueError("negative bit count")
        if k == 0:
            return 0
        check_bits(k, "RAND(2^k) draw")
        if self.is_oracle:
            if self.cursor + k > self._len:
                raise TapeExhausted(
                    f"need {k} bits at offset {self.cursor}, tape has {self._len}")
            value = (self._tape >> self.cursor) & ((1 << k) - 1)
            self.cursor += k
            return value
        self.cursor += k
        return self._rng.getrandbits(k)

    def below(self, y: int) -> int:
        """RAND(y): uniform in [0, y), by rejection over bit_length(y-1)-bit reads."""
        if y <= 0:
            raise RandZero("RAND(0) has an empty range")
        k = (y - 1).bit_length()
        while True:
            x = self.bits(k)
            if x < y:
                return x
