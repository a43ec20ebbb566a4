"""Element-parallel arithmetic on sparse-domain maps.

A map ``(L, I, w)`` stores one ``w``-bit element at each 1-bit of the domain
``I``; domain bits are at least ``w`` apart, so elements never overlap.  Every
function here runs a fixed number of big-integer operations regardless of how
many elements the map holds.  Results called *indicators* carry one bit per
domain index.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from pelram.errors import ShapeError
from pelram.meter import tick
from pelram.natnum import monus
from pelram.tm import TmSpec, compile_step_circuit


def set_bits(x: int) -> list[int]:
    """Positions of the 1-bits of ``x``, ascending."""
    digits = bin(int(x))[:1:-1]
    return [i for i, ch in enumerate(digits) if ch == "1"]


def is_sparse(I: int, w: int) -> bool:
    """True when every two 1-bits of ``I`` are at least ``w`` positions apart."""
    prev = None
    for p in set_bits(I):
        if prev is not None and p - prev < w:
            return False
        prev = p
    return True


@dataclass(frozen=True)
class WordMap:
    L: int
    I: int
    w: int

    def validate(self) -> None:
        if self.w < 2:
            raise ShapeError("map width must be at least 2")
        if not is_sparse(self.I, self.w):
            raise ShapeError(f"domain is not {self.w}-sparse")
        if self.L & ~mask_of(self.I, self.w):
            raise ShapeError("contents spill outside the element windows")

    @property
    def valid(self) -> bool:
        try:
            self.validate()
        except ShapeError:
            return False
        return True

    def indices(self) -> list[int]:
        return set_bits(self.I)

    def elements(self) -> dict[int, int]:
        mask = (1 << self.w) - 1
        return {p: (self.L >> p) & mask for p in self.indices()}

    @classmethod
    def from_elements(cls, elements: dict[int, int], w: int) -> "WordMap":
        L = I = 0
        for p, v in elements.items():
            I |= 1 << p
            L |= (v & ((1 << w) - 1)) << p
        return cls(L, I, w)


def mask_of(I: int, w: int) -> int:
    """MASK(I, w) = (I << w) - I: every bit of every element window."""
    return monus(I << w, I)


def flags_data(V: int, I: int, w: int) -> tuple[int, int]:
    """Split each element into its top (flag) bit and its low ``w-1`` data bits."""
    flags_mask = I << (w - 1)
    data_mask = monus(flags_mask, I)
    return V & flags_mask, V & data_mask


def madd(V: int, U: int, I: int, w: int) -> int:
    """Elementwise ``(v + u) mod 2^w``."""
    fv, dv = flags_data(V, I, w)
    fu, du = flags_data(U, I, w)
    return (dv + du) ^ fv ^ fu


def mcarry(V: int, U: int, I: int, w: int) -> int:
    """Indicator of ``v + u >= 2^w``."""
    return monus(V + U, madd(V, U, I, w)) >> w


def mneg(V: int, I: int, w: int) -> int:
    """Elementwise ``2^w - 1 - v``."""
    return monus(mask_of(I, w), V)


def mgt(V: int, U: int, I: int, w: int) -> int:
    """Indicator of ``v > u``."""
    return mcarry(V, mneg(U, I, w), I, w)


def meq(V: int, U: int, I: int, w: int) -> int:
    """Indicator of ``v == u``."""
    return monus(monus(I, mgt(V, U, I, w)), mgt(U, V, I, w))


def scale_domain(I: int, inp: int) -> int:
    """``I * inp`` by shift-and-add; one loop pass per bit of ``inp``."""
    acc_in = I & 0
    acc = I
    r = inp
    while r != 0:
        tick()
        if r & 1 == 1:
            acc_in = acc_in + acc
        r = r >> 1
        acc = acc << 1
    return acc_in


# --- simultaneous tableau verification -------------------------------------

class Verdict(enum.Enum):
    ACCEPTS = "accepts"
    REJECTS = "rejects"
    NEEDS_MORE_TAPE = "needs_more_tape"
    REJECTS_BY_LOOPING = "rejects_by_looping"
    SIMULATION_FAILED = "simulation_failed"

    @property
    def message(self) -> str:
        return _MESSAGES[self]


_MESSAGES = {
    Verdict.ACCEPTS: "T accepts",
    Verdict.REJECTS: "T rejects",
    Verdict.NEEDS_MORE_TAPE: "T needs more than s tape cells",
    Verdict.REJECTS_BY_LOOPING: "T rejects by looping forever",
    Verdict.SIMULATION_FAILED: "Simulation failed. No valid tableau found",
}


@dataclass(frozen=True)
class MapGeometry:
    w: int          # ID width s + c - 1
    rows: int       # tableau length, B unless overridden
    w_m: int        # bits of one packed vector
    w_hat: int      # map element width 4 * w_m


def map_geometry(spec: TmSpec, s: int, log_rows: int | None = None) -> MapGeometry:
    """Widths used by the parallel verifier.

    ``log_rows`` overrides the tableau length B = 2^(3w) with 2^log_rows.
    """
    w = s + monus(spec.c, 1)
    e = (w + w + w) if log_rows is None else log_rows
    w_m = w << e
    return MapGeometry(w, 1 << e, w_m, w_m << 2)


def _times_state(indicator: int, state: int) -> int:
    acc = indicator & 0
    for t in range(state.bit_length()):
        if state >> t & 1:
            acc = acc | (indicator << t)
    return acc


def parallel_residues(L: int, I_hat: int, s: int, inp: int, spec: TmSpec, *,
                      log_rows: int | None = None, reversed_rows: bool = False
                      ) -> tuple[MapGeometry, dict[str, int]]:
    """Residue maps (width w_m, domain I_hat) whose zero elements mark valid tableaux.

    Keys are ``valid``, ``accepting``, ``rejecting`` and ``exceeded``.  With
    ``reversed_rows`` the initial ID is expected in the top row and its tape
    is not checked (the caller has fixed it already).
    """
    g = map_geometry(spec, s, log_rows)
    w, w_m = g.w, g.w_m
    full = mask_of(I_hat, w_m)
    row_mask = mask_of(I_hat, w)
    T = (L >> (w_m + w_m + w_m)) & full
    H = (L >> (w_m + w_m)) & full
    S = (L >> w_m) & full
    I = L & full

    step = compile_step_circuit(spec)
    T2, H2, S2, _, _ = step(T, H, S, I, I << s)

    i_check = (I << w) ^ I ^ ((I_hat << w_m) + I_hat)
    r_i = (i_check & full) | ((i_check >> w_m) & row_mask)
    top = monus(w_m, w)
    if not reversed_rows:
        IN = scale_domain(I_hat, inp)
        r_t = (((T2 << w) ^ T) & full) ^ IN
        r_h = (((H2 << w) ^ H) & full) ^ I_hat
        r_s = ((S2 << w) ^ S) & full
        last_h = (H >> top) & row_mask
        last_s = (S >> top) & row_mask
    else:
        below_top = mask_of(I_hat, top)
        r_t = ((T2 >> w) ^ T) & below_top
        r_h = (((H2 >> w) ^ H) & below_top) | (((H >> top) & row_mask) ^ I_hat)
        r_s = (((S2 >> w) ^ S) & below_top) | ((S >> top) & row_mask)
        last_h = H & row_mask
        last_s = S & row_mask
    valid = r_t | r_h | r_s | r_i
    res = {"valid": valid}
    for key, state in (("accepting", spec.accept_state), ("rejecting", spec.reject_state),
                       ("exceeded", spec.exceeded_state)):
        res[key] = valid | (last_s ^ _times_state(last_h, state))
    return g, res


def verify_parallel(L: int, I_hat: int, s: int, inp: int, spec: TmSpec, *,
                    w_hat: int | None = None, log_rows: int | None = None,
                    reversed_rows: bool = False) -> Verdict:
    """Check every tableau candidate in the map at once and report the outcome.

    Candidates are tested against the accept, reject and exceeded-tape
    variants in that order; a valid tableau that ends in none of those proves
    an infinite loop (when it has the full B rows).
    """
    g = map_geometry(spec, s, log_rows)
    if w_hat is not None and w_hat != g.w_hat:
        raise ShapeError(f"map width {w_hat} does not match 4 * w_m = {g.w_hat}")
    _, res = parallel_residues(L, I_hat, s, inp, spec, log_rows=log_rows,
                               reversed_rows=reversed_rows)
    for key, verdict in (("accepting", Verdict.ACCEPTS), ("rejecting", Verdict.REJECTS),
                         ("exceeded", Verdict.NEEDS_MORE_TAPE),
                         ("valid", Verdict.REJECTS_BY_LOOPING)):
        tick()
        if meq(res[key], 0, I_hat, g.w_m) != 0:
            return verdict
    return Verdict.SIMULATION_FAILED


def pack_candidates(composites: dict[int, int], w_hat: int) -> WordMap:
    """Map with one tableau composite per index (test and CLI helper)."""
    return WordMap.from_elements(composites, w_hat)
