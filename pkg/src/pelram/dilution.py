"""Random generation of sparse map domains.

Sparseness is guaranteed for *every* random input: a bad draw can only
thin the domain out further, never put two indices too close together.
Each round lifts the guaranteed spacing from ``w`` to ``w * 2^w + 1`` by
keeping one index per run of exactly spaced indices whose random companion
bits form a complete ``w``-bit counter.
"""

from __future__ import annotations

from dataclasses import dataclass

from pelram.errors import ResourceLimit
from pelram.meter import MNat, tick
from pelram.natnum import check_bits, clr, get_bit_ceiling, monus
from pelram.randsrc import RandomSource
from pelram.wordmap import is_sparse, madd, mask_of, meq


@dataclass(frozen=True)
class SparseDomain:
    I: int
    w: int

    @property
    def weight(self) -> int:
        return bin(self.I).count("1")

    def check(self) -> bool:
        return is_sparse(self.I, self.w)


def next_width(w: int) -> int:
    """w * 2^w + 1, written with a shift."""
    return (w << w) + 1


def width_sequence(count: int) -> list[int]:
    out = [2]
    while len(out) < count:
        out.append(next_width(out[-1]))
    return out


def bootstrap_domain(r0: int) -> SparseDomain:
    """Keep the lowest bit of every run of ones in ``r0``, moved down by one: 2-sparse."""
    I = clr(r0, r0 << 1)
    return SparseDomain(I >> 1, 2)


def dilute_step(d: SparseDomain, r: int, k: int | None = None) -> SparseDomain:
    """One dilution round, with ``r`` acting as the oracle counter string."""
    if k is not None and r >> k:
        raise ValueError(f"r does not fit in {k} bits")
    I, w = d.I, d.w
    begin = clr(I, I << w)
    end = clr(I << w, I)
    middle = monus(I, begin)
    good_begin = meq(r & mask_of(begin, w), 0, begin, w)
    end_mask = mask_of(end, w)
    good_end = meq((r << w) & end_mask, end_mask, end, w)
    mid_mask = mask_of(middle, w)
    good_middle = meq(madd((r << w) & mid_mask, middle, middle, w), r & mid_mask, middle, w)
    w_next = next_width(w)
    joined = (mask_of(good_begin + good_middle, w) + good_begin) & good_end
    return SparseDomain(joined >> monus(w_next, 1), w_next)


def build_domain(target_w: int, k: int, rng: RandomSource) -> SparseDomain:
    """Bootstrap, then dilute until the spacing reaches ``target_w``."""
    if target_w < 2:
        raise ValueError("target width must be at least 2")
    d = bootstrap_domain(MNat(rng.bits(k)))
    while d.w < target_w:
        tick()
        d = dilute_step(d, MNat(rng.bits(k)), k)
    return d


def rounds_needed(target_w: int) -> int:
    """Number of dilute_step rounds after the bootstrap to reach ``target_w``."""
    w, n = 2, 0
    while w < target_w:
        w = next_width(w)
        n += 1
    return n


@dataclass(frozen=True)
class DilutionPlan:
    k: int
    target_w: int
    i: int
    Z: int
    W: int


def choose_k(i: int, W_bound: int, Z_bound: int) -> int:
    """An upper bound on W * (i+1) * 2^Z using only shifts: (W << (i+1)) << Z.

    Raises ResourceLimit when the result would exceed the bit ceiling, since
    ``k`` is the bit count of a single random draw.
    """
    if min(i + 1, W_bound, Z_bound) < 1:
        raise ValueError("bounds must be at least 1 and i nonnegative")
    nbits = W_bound.bit_length() + i + 1 + Z_bound
    # k itself has nbits bits; a draw of k bits must fit under the ceiling
    if nbits > get_bit_ceiling().bit_length():
        raise ResourceLimit(f"k needs about 2^{nbits - 1} bits per draw, "
                            f"ceiling is {get_bit_ceiling()}")
    k = (W_bound << (i + 1)) << Z_bound
    check_bits(k, "RAND(2^k) draw")
    return k


def plan_dilution(i: int, target_w: int) -> DilutionPlan:
    """Segment width and prescribed-bit count for one driver pass.

    W covers one candidate element plus its counter windows; Z counts the
    bits that have to come out right in every round for a segment to succeed.
    Both constants are configuration, chosen to be safe over-estimates.
    """
    rounds = rounds_needed(target_w)
    W = target_w << 2
    Z = W * (rounds + 2)
    return DilutionPlan(choose_k(i, W, Z), target_w, i, Z, W)
