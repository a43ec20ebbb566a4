"""Randomized simulation of a space-bounded Turing machine by a BRP-RAM.

Each pass of the driver fixes a tape size ``s``, draws a sparse domain and a
random map of tableau candidates over it, and checks all candidates at once.
An input is only ever accepted on the strength of a fully verified accepting
tableau, so randomness can cause false rejections but never false
acceptances.

Also here: the multiplication-free candidate generator that pins every
candidate's initial tape to the input, the transform that collates all
``RAND(y)`` calls of a program into a single ``RAND(2^k)`` draw, and the
"lucky tape" builder that emits exactly the random bits needed for the driver
to succeed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from pelram.dilution import build_domain, next_width, plan_dilution, rounds_needed
from pelram.errors import PelramError, PolicyViolation, ShapeError, TransformInapplicable
from pelram.meter import MNat, OpMeter, metered, tick
from pelram.natnum import PrimOp, check_bits, clr, monus
from pelram.ram.program import (
    RAND_GENERAL, RAND_NONE, RAND_POW2, Instruction, Opcode, Operand, Program, lit, reg,
)
from pelram.randsrc import RandomSource
from pelram.tableau import build_tableau
from pelram.tm import TmSpec
from pelram.wordmap import (
    Verdict, WordMap, madd, map_geometry, mask_of, meq, verify_parallel,
)

SCALE_VARIANT = "scale"
INPUT_VERIFY_VARIANT = "input_verify"


def tetrate(base: int, height: int) -> int:
    """``^height base``: a tower of ``height`` copies of ``base``."""
    if height < 1:
        raise ValueError("tetration height must be at least 1")
    if base < 0:
        raise ValueError("base must be a natural number")
    result = base
    for _ in range(height - 1):
        if base > 1:
            check_bits(result * (base.bit_length() - 1) + 1, "tetration")
        result = base ** result
    return result


# --- the driver -------------------------------------------------------------

@dataclass(frozen=True)
class SimLimits:
    max_maxstep: int = 4
    k: int | None = None            # bits per random draw; None derives it from a plan
    log_rows: int | None = None     # tableau length 2^log_rows instead of B
    variant: str = SCALE_VARIANT


@dataclass
class SimDriverState:
    maxstep: int = 1
    s: int = 0
    iteration: int = 0
    verdict: Verdict | None = None


@dataclass(frozen=True)
class SimulationResult:
    outcome: str                    # "accepted" or "rejected"
    steps_used: int                 # unit-cost operations charged to the meter
    diagnostic: str
    passes: tuple[tuple[int, int, str], ...] = field(default=())  # (maxstep, s, verdict)

    @property
    def accepted(self) -> bool:
        return self.outcome == "accepted"


def simulate_pel(spec: TmSpec, inp: int, rng: RandomSource,
                 limits: SimLimits = SimLimits()) -> SimulationResult:
    """Decide ``inp`` for ``spec`` by repeated randomized tableau search.

    Returns accepted only after a verified accepting tableau.  Resource
    exhaustion, a tape or draw that runs out, and an undetermined pass all end
    in rejection with a diagnostic.
    """
    if limits.variant not in (SCALE_VARIANT, INPUT_VERIFY_VARIANT):
        raise ValueError(f"unknown variant {limits.variant!r}")
    st = SimDriverState()
    passes: list[tuple[int, int, str]] = []
    with metered() as meter:
        try:
            n = max(2, int(inp).bit_length())
            while st.maxstep <= limits.max_maxstep:
                tick()
                st.s = tetrate(n, st.maxstep)
                st.verdict = _one_pass(spec, inp, rng, limits, st)
                passes.append((st.maxstep, st.s, st.verdict.value))
                if st.verdict is Verdict.SIMULATION_FAILED:
                    return _done("rejected", meter, st.verdict.message, passes)
                if st.verdict is not Verdict.NEEDS_MORE_TAPE:
                    outcome = "accepted" if st.verdict is Verdict.ACCEPTS else "rejected"
                    return _done(outcome, meter, st.verdict.message, passes)
                st.maxstep = st.maxstep + st.maxstep
                st.iteration += 1
        except PelramError as exc:
            return _done("rejected", meter, f"{type(exc).__name__}: {exc}", passes)
    return _done("rejected", meter, f"maxstep limit {limits.max_maxstep} reached", passes)


def _done(outcome: str, meter: OpMeter, diagnostic: str, passes) -> SimulationResult:
    return SimulationResult(outcome, meter.ops, diagnostic, tuple(passes))


def _draw(rng: RandomSource, k: int) -> MNat:
    tick()
    return MNat(rng.bits(k))


def _one_pass(spec: TmSpec, inp: int, rng: RandomSource, limits: SimLimits,
              st: SimDriverState) -> Verdict:
    g = map_geometry(spec, st.s, limits.log_rows)
    check_bits(g.w_hat, "map element width")
    if limits.variant == SCALE_VARIANT:
        k = limits.k if limits.k is not None else plan_dilution(st.iteration, g.w_hat).k
        d = build_domain(g.w_hat, k, rng)
        I_hat = d.I & monus(MNat(1) << monus(k, g.w_hat), 1)
        L = _draw(rng, k) & mask_of(I_hat, g.w_hat)
        return verify_parallel(L, I_hat, st.s, MNat(inp), spec, w_hat=g.w_hat,
                               log_rows=limits.log_rows)
    # multiplication-free variant: two extra dilution rounds, then pin the input
    check_bits(g.w_hat + 1, "input-verify element width")
    element_width = 1 << g.w_hat
    check_bits(element_width.bit_length() + element_width, "input-verify width")
    width = element_width << element_width
    k = limits.k if limits.k is not None else plan_dilution(st.iteration, width).k
    d = build_domain(width + 1, k, rng)
    out = input_verify(d.I, d.w, g.w_hat, inp, g.w, rng, k)
    return verify_parallel(out.L, out.I, st.s, MNat(inp), spec, w_hat=g.w_hat,
                           log_rows=limits.log_rows, reversed_rows=True)


# --- candidates with a pinned initial tape ----------------------------------

def input_verify(Ix: int, wx: int, w_hat: int, inp: int, w: int, rng: RandomSource,
                 k: int) -> WordMap:
    """Map of every ``w_hat``-bit string whose top ``w`` bits equal ``inp``.

    Each domain index of ``Ix`` gets a random block; blocks that turn out to
    be a constant ``0..01`` pattern and a complete counter survive, and a
    mask keeps the counter values in the ``inp`` range.  Any tape yields a
    valid map; a tape without a complete block yields the empty map.
    """
    if not 1 <= w <= w_hat:
        raise ShapeError("need 1 <= w <= w_hat")
    if inp >> w:
        raise ShapeError(f"input {inp} does not fit in {w} bits")
    element_width = 1 << w_hat
    width = element_width << element_width
    if wx <= width:
        raise ShapeError(f"domain spacing {wx} must exceed {width}")
    L_const = MNat(rng.bits(k)) & mask_of(Ix, width)
    good_begin = meq(L_const & mask_of(Ix, element_width), Ix, Ix, element_width)
    good_trans = clr(mask_of(good_begin, width), L_const ^ (L_const << element_width)) \
        | mask_of(good_begin, element_width)
    good = good_begin & ((good_trans + good_begin) >> width)
    L_counter = MNat(rng.bits(k)) & mask_of(good, width)
    good_begin = good & meq(L_counter & mask_of(Ix, element_width), 0, Ix, element_width)
    temp = madd(L_counter, L_const, L_const, element_width) << element_width
    gb_mask = mask_of(good_begin, element_width)
    good_trans = clr(mask_of(good_begin, width), L_counter ^ temp) | gb_mask
    good = good_begin & ((good_trans + good_begin) >> width)
    M = mask_of(good << (inp << (w_hat + monus(w_hat, w))),
                element_width << monus(w_hat, w))
    return WordMap(int(L_counter & M), int(L_const & M), w_hat)


def input_verify_blocks(w_hat: int) -> tuple[int, int]:
    """The two random blocks that make one domain index survive input_verify."""
    ew = 1 << w_hat
    const = counter = 0
    for j in range(1 << ew):
        const |= 1 << (j * ew)
        counter |= j << (j * ew)
    return const, counter


# --- lucky tapes ------------------------------------------------------------

@dataclass(frozen=True)
class LuckyTape:
    rng: RandomSource
    k: int
    position: int
    draws: tuple[int, ...]


def _runs_below(positions: list[int], w: int) -> list[int]:
    """Indices one level down: a run of 2^w indices spaced w, starting at each position."""
    return [p + w * t for p in positions for t in range(1 << w)]


def lucky_tape(spec: TmSpec, inp: int, *, log_rows: int | None = None,
               position: int = 8, maxstep: int = 1) -> LuckyTape:
    """Oracle tape on which the first driver pass finds the true tableau.

    The domain ends up with the single index ``position``; every dilution
    round sees perfect counters on the runs leading to it, and the final
    draw holds the correct tableau composite at that index.
    """
    n = max(2, inp.bit_length())
    s = tetrate(n, maxstep)
    g = map_geometry(spec, s, log_rows)
    rounds = rounds_needed(g.w_hat)
    widths = [2]
    for _ in range(rounds):
        widths.append(next_width(widths[-1]))
    levels = [[position]]
    for j in range(rounds - 1, -1, -1):
        levels.insert(0, _runs_below(levels[0], widths[j]))
    k = max([position + g.w_hat + 1, max(levels[0]) + 2]
            + [max(levels[j]) + widths[j] for j in range(rounds)])
    r0 = 0
    for q in levels[0]:
        r0 |= 1 << (q + 1)
    draws = [r0]
    for j in range(rounds):
        w = widths[j]
        r = 0
        pos = sorted(levels[j])
        run_start = None
        for idx, p in enumerate(pos):
            if idx == 0 or p - pos[idx - 1] != w:
                run_start = p
            r |= ((p - run_start) // w) << p
        draws.append(r)
    t = build_tableau(spec, inp, s, g.rows)
    draws.append(t.composite() << position)
    rng = RandomSource.from_values([(v, k) for v in draws])
    return LuckyTape(rng, k, position, tuple(draws))


# --- collating RAND(y) into one RAND(2^k) draw --------------------------------

RP_MODE = "rp"
BPP_MODE = "bpp"


@dataclass(frozen=True)
class RpToBrpPlan:
    maxstep: int
    M: int
    k_tilde: int
    repetitions: int = 3
    mode: str = RP_MODE

    def __post_init__(self):
        if self.mode not in (RP_MODE, BPP_MODE):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.repetitions != 3:
            raise ValueError("the collation argument uses exactly three repetitions")
        if self.k_tilde < self.required_bits():
            raise ValueError("k_tilde too small: 2^k_tilde must exceed M^maxstep")

    def required_bits(self) -> int:
        need = (self.M ** self.maxstep).bit_length() if self.M > 1 else 1
        return need + (2 if self.mode == BPP_MODE else 0)


def make_plan(maxstep: int, M: int, mode: str = RP_MODE) -> RpToBrpPlan:
    """Plan with k~ = bitlen(M) << maxstep (a shift standing in for the product)."""
    if maxstep < 1 or M < 1:
        raise ValueError("maxstep and M must be positive")
    k_tilde = max(2, M).bit_length() << maxstep
    if mode == BPP_MODE:
        k_tilde += 2
    check_bits(k_tilde, "collated draw")
    return RpToBrpPlan(maxstep, M, k_tilde, 3, mode)


def rp_collated_bound(p: float) -> float:
    """Worst-case acceptance of one collated run, given acceptance p before."""
    return p / (2 - p)


def rp_three_run_bound(p: float) -> float:
    return 1 - (1 - rp_collated_bound(p)) ** 3


def bpp_collated_error(e: float) -> float:
    """Error of one collated run with the two extra bits, given error e before."""
    return 4 * e / (5 - e)


def majority_of_three(q: float) -> float:
    """Probability that at least two of three independent trials succeed."""
    return q * q * (3 - 2 * q)


def bpp_three_run_error(e: float) -> float:
    return 1 - majority_of_three(1 - bpp_collated_error(e))


def _literal_build(dest: Operand, value: int) -> list[Instruction]:
    """Load ``value`` into ``dest`` using only the literals 0 and 1 and doubling."""
    if value == 0:
        return [Instruction(Opcode.ASSIGN, dest, (lit(0),))]
    out = [Instruction(Opcode.ASSIGN, dest, (lit(1),))]
    for bit in bin(value)[3:]:
        out.append(Instruction(Opcode.PRIM, dest, (dest, dest), PrimOp.ADD))
        if bit == "1":
            out.append(Instruction(Opcode.PRIM, dest, (dest, lit(1)), PrimOp.ADD))
    return out


def rp_to_brp(p: Program, plan: RpToBrpPlan) -> Program:
    """Program using one ``RAND(2^k~)`` per repetition in place of all ``RAND(y)``.

    Each repetition restores the input, draws X once, and runs at most
    ``plan.maxstep`` steps of ``p`` with every ``RAND(y)`` answered by
    ``X mod y`` followed by ``X := X div y``.  In rp mode any accepting
    repetition accepts; in bpp mode two of three must accept.
    """
    if p.uses_indirect:
        raise TransformInapplicable("indirect addressing prevents resetting registers")
    if p.policy.rand_mode == RAND_POW2 or any(i.op is Opcode.RAND2 for i in p.instructions):
        raise PolicyViolation("input program must use rand(y), not rand2")
    if p.policy.rand_mode not in (RAND_GENERAL, RAND_NONE):
        raise PolicyViolation(f"unexpected rand mode {p.policy.rand_mode}")
    top = p.highest_register_named()
    saved, X, K, steps, limit, votes, q, t, two = (reg(top + 1 + i) for i in range(9))
    n = len(p.instructions)

    code: list[Instruction | tuple] = []  # tuples are (op, ..., "label") fixed up below
    labels: dict[str, int] = {}

    def here(name: str) -> None:
        labels[name] = len(code)

    def emit(*ins: Instruction) -> None:
        code.extend(ins)

    def jump(op: Opcode, args: tuple, name: str) -> None:
        code.append((op, args, name))

    emit(Instruction(Opcode.ASSIGN, saved, (reg(0),)))
    emit(*_literal_build(K, plan.k_tilde))
    emit(*_literal_build(limit, plan.maxstep))
    emit(Instruction(Opcode.ASSIGN, votes, (lit(0),)))
    for rep in range(plan.repetitions):
        done = f"done{rep}"
        emit(Instruction(Opcode.ASSIGN, reg(0), (saved,)))
        for r in range(1, top + 1):
            emit(Instruction(Opcode.ASSIGN, reg(r), (lit(0),)))
        emit(Instruction(Opcode.RAND2, X, (K,)))
        emit(Instruction(Opcode.ASSIGN, steps, (lit(0),)))
        for idx, ins in enumerate(p.instructions):
            here(f"r{rep}i{idx}")
            jump(Opcode.BEQ, (steps, limit), done)
            emit(Instruction(Opcode.PRIM, steps, (steps, lit(1)), PrimOp.ADD))
            if ins.op is Opcode.RAND:
                (y,) = ins.args
                emit(Instruction(Opcode.PRIM, q, (X, y), PrimOp.INTDIV),
                     Instruction(Opcode.PRIM, t, (q, y), PrimOp.MUL),
                     Instruction(Opcode.PRIM, ins.dest, (X, t), PrimOp.MONUS),
                     Instruction(Opcode.ASSIGN, X, (q,)))
            elif ins.op is Opcode.ACCEPT:
                jump(Opcode.JUMP, (), f"yes{rep}")
            elif ins.op in (Opcode.REJECT,):
                jump(Opcode.JUMP, (), done)
            elif ins.op is Opcode.HALT:
                jump(Opcode.JUMP, (), f"r{rep}i{n}")
            elif ins.target is not None:
                jump(ins.op, ins.args, f"r{rep}i{ins.target}")
            else:
                emit(ins)
        here(f"r{rep}i{n}")                      # halted: accept iff R0 != 0
        jump(Opcode.BEQ, (reg(0), lit(0)), done)
        here(f"yes{rep}")
        if plan.mode == RP_MODE:
            emit(Instruction(Opcode.ACCEPT))
        else:
            emit(Instruction(Opcode.PRIM, votes, (votes, lit(1)), PrimOp.ADD))
        here(done)
    if plan.mode == RP_MODE:
        emit(Instruction(Opcode.REJECT))
    else:
        emit(Instruction(Opcode.PRIM, two, (lit(1), lit(1)), PrimOp.ADD))
        jump(Opcode.BEQ, (votes, two), "majority")
        emit(Instruction(Opcode.PRIM, two, (two, lit(1)), PrimOp.ADD))
        jump(Opcode.BEQ, (votes, two), "majority")
        emit(Instruction(Opcode.REJECT))
        here("majority")
        emit(Instruction(Opcode.ACCEPT))

    body = []
    for item in code:
        if isinstance(item, tuple):
            op, args, name = item
            body.append(Instruction(op, None, args, target=labels[name]))
        else:
            body.append(item)
    policy = p.policy.with_ops(PrimOp.MUL, PrimOp.INTDIV, PrimOp.MONUS, rand_mode=RAND_POW2)
    names = {name: pos for name, pos in labels.items()}
    return Program(tuple(body), policy, names)


__all__ = [
    "SCALE_VARIANT", "INPUT_VERIFY_VARIANT", "tetrate", "SimLimits", "SimDriverState",
    "SimulationResult", "simulate_pel", "input_verify", "input_verify_blocks", "LuckyTape",
    "lucky_tape", "RP_MODE", "BPP_MODE", "RpToBrpPlan", "make_plan", "rp_collated_bound",
    "rp_three_run_bound", "bpp_collated_error", "majority_of_three", "bpp_three_run_error",
    "rp_to_brp",
]
