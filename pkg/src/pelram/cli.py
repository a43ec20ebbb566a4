"""Command-line entry point: ``pelram <command> ...``."""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import sys
from importlib import resources
from pathlib import Path

from pelram.dilution import build_domain
from pelram.errors import PelramError, ShapeError
from pelram.natnum import DEFAULT_BIT_CEILING, bit_ceiling
from pelram.pelsim import (
    BPP_MODE, INPUT_VERIFY_VARIANT, RP_MODE, SCALE_VARIANT, SimLimits, input_verify,
    input_verify_blocks, lucky_tape, make_plan, rp_to_brp, simulate_pel,
)
from pelram.ram.asm import format_program, parse_program
from pelram.ram.machine import ACCEPTED, BUDGET_EXHAUSTED, REJECTED, run
from pelram.ram.shiftelim import eliminate_right_shifts
from pelram.randsrc import RandomSource
from pelram.tableau import Tableau, build_tableau, verify_tableau
from pelram.tm import TmSpec, run_tm_reference
from pelram.wordmap import WordMap, madd, mcarry, meq, mgt, mneg

EXIT_CODES = {ACCEPTED: 0, REJECTED: 1, BUDGET_EXHAUSTED: 2}
DEFAULT_MAX_ROWS = 1 << 12


class CliError(Exception):
    pass


# --- plumbing ---------------------------------------------------------------

def resolve_path(name: str) -> Path:
    """A path as given, or else a bundled fixture of that name."""
    p = Path(name)
    if p.exists():
        return p
    bundled = resources.files("pelram") / "fixtures" / name
    if bundled.is_file():
        return Path(str(bundled))
    raise CliError(f"no such file: {name}")


def effective_seed(args) -> int | None:
    if args.seed is not None:
        return args.seed
    if args.tape is None and os.environ.get("PELRAM_SEED"):
        try:
            return int(os.environ["PELRAM_SEED"])
        except ValueError:
            raise CliError("PELRAM_SEED must be an integer") from None
    return None


def make_rng(args) -> RandomSource:
    if args.tape is not None:
        return RandomSource.from_tape(resolve_path(args.tape).read_text())
    return RandomSource.seeded(effective_seed(args))


class Reporter:
    def __init__(self, args):
        self.cmd = args.command
        self.json = args.format == "json-lines"
        self.seed = effective_seed(args)

    def emit(self, outcome: str, steps: int | None = None, text: str | None = None, **extra):
        if self.json:
            rec = {"cmd": self.cmd, "seed": self.seed, "outcome": outcome, "steps": steps}
            rec.update(extra)
            print(json.dumps(rec, sort_keys=True, default=str))
        else:
            print(text if text is not None else outcome)


def load_tm(path: str) -> TmSpec:
    return TmSpec.from_text(resolve_path(path).read_text())


# --- commands ---------------------------------------------------------------

def cmd_run_ram(args, rep: Reporter) -> int:
    program = parse_program(resolve_path(args.program).read_text())
    if args.eliminate_shr:
        program = eliminate_right_shifts(program)
    res = run(program, args.input, args.budget, make_rng(args))
    text = f"{res.outcome} steps={res.steps_used} R0={res.final_r0}"
    if res.error:
        text += f" error={res.error}"
    rep.emit(res.outcome, res.steps_used, text, final_r0=str(res.final_r0), error=res.error)
    return EXIT_CODES.get(res.outcome, 3)


def cmd_run_tm(args, rep: Reporter) -> int:
    spec = load_tm(args.tm)
    max_steps = args.max_steps if args.max_steps is not None else spec.id_bound(args.s)
    out = run_tm_reference(spec, args.input, args.s, max_steps)
    rep.emit(out.kind, out.steps, f"{out.kind} steps={out.steps}")
    return {"accepted": 0, "rejected": 1}.get(out.kind, 2)


def _check_rows(n: int, args) -> None:
    if n > args.max_rows:
        raise CliError(f"{n} rows exceeds the row ceiling {args.max_rows} (see --max-rows)")


def cmd_tableau(args, rep: Reporter) -> int:
    spec = load_tm(args.tm)
    if args.action == "verify":
        try:
            t = Tableau.restore(resolve_path(args.dump).read_text())
        except ShapeError as exc:
            rep.emit("shape_error", None, f"shape error: {exc}")
            return 3
        status = verify_tableau(t, spec, args.input)
        rep.emit("valid" if status.valid else "invalid", None, str(status),
                 terminal=status.terminal)
        return 0 if status.valid else 1
    n = args.n if args.n is not None else spec.id_bound(args.s)
    _check_rows(n, args)
    t = build_tableau(spec, args.input, args.s, n)
    if args.action == "build":
        dump = t.dump()
        if args.out:
            Path(args.out).write_text(dump + "\n")
            text = f"wrote {args.out} (m={t.m} n={t.n} s={t.s})"
        else:
            text = dump
        rep.emit("built", None, text, m=t.m, n=t.n, s=t.s)
        return 0
    # corrupt
    field = args.field or "T"
    bit = args.bit
    if bit is None:
        bit = make_rng(args).below(t.bits)
    if not 0 <= bit < t.bits:
        raise CliError(f"bit {bit} outside 0..{t.bits - 1}")
    status = verify_tableau(t.with_bit_flipped(field, bit), spec, args.input)
    rep.emit("valid" if status.valid else "invalid", None, str(status), field=field, bit=bit)
    return 0 if not status.valid else 1


def _parse_elems(text: str) -> list[int]:
    return [int(x, 0) for x in text.split(",") if x.strip()]


def cmd_mapops(args, rep: Reporter) -> int:
    v = _parse_elems(args.v)
    u = _parse_elems(args.u) if args.u else [0] * len(v)
    if len(u) != len(v):
        raise CliError("--v and --u need the same number of elements")
    w = args.w
    spacing = args.spacing or w
    idx = [i * spacing for i in range(len(v))]
    V = WordMap.from_elements(dict(zip(idx, v)), w)
    U = WordMap.from_elements(dict(zip(idx, u)), w)
    I = V.I
    ops = {
        "add": lambda: madd(V.L, U.L, I, w),
        "carry": lambda: mcarry(V.L, U.L, I, w),
        "neg": lambda: mneg(V.L, I, w),
        "gt": lambda: mgt(V.L, U.L, I, w),
        "eq": lambda: meq(V.L, U.L, I, w),
    }
    out = ops[args.op]()
    width = w if args.op in ("add", "neg") else 1
    result = [(out >> p) & ((1 << width) - 1) for p in idx]
    rep.emit("ok", None, " ".join(map(str, result)), result=result)
    return 0


def cmd_dilute(args, rep: Reporter) -> int:
    d = build_domain(args.target_w, args.k, make_rng(args))
    sparse = d.check()
    rep.emit("ok" if sparse else "not_sparse", None,
             f"w: {d.w}\nweight: {d.weight}\nsparse: {str(sparse).lower()}",
             w=str(d.w), weight=d.weight, sparse=sparse)
    return 0 if sparse else 1


def cmd_inputverify(args, rep: Reporter) -> int:
    ew = 1 << args.w_hat
    width = ew << ew
    if args.lucky:
        const, counter = input_verify_blocks(args.w_hat)
        k = width
        rng = RandomSource.from_values([(const, k), (counter, k)])
    else:
        k = args.k or width
        rng = make_rng(args)
    out = input_verify(1, width + 1, args.w_hat, args.input, args.w, rng, k)
    elems = sorted(out.elements().values())
    text = "elements: " + " ".join(format(e, f"0{args.w_hat}b") for e in elems)
    rep.emit("ok", None, text, elements=elems, valid=out.valid)
    return 0


def cmd_pelsim(args, rep: Reporter) -> int:
    spec = load_tm(args.tm)
    limits = SimLimits(max_maxstep=args.max_maxstep, k=args.k, log_rows=args.log_rows,
                       variant=args.variant)
    if args.lucky_tape:
        log_rows = args.log_rows if args.log_rows is not None else 8
        lt = lucky_tape(spec, args.input, log_rows=log_rows)
        limits = SimLimits(args.max_maxstep, lt.k, log_rows, args.variant)
        rng = lt.rng
    else:
        rng = make_rng(args)
    res = simulate_pel(spec, args.input, rng, limits)
    rep.emit(res.outcome, res.steps_used, f"{res.outcome}: {res.diagnostic} "
             f"(ops={res.steps_used})", diagnostic=res.diagnostic)
    return 0 if res.accepted else 1


def cmd_rp2brp(args, rep: Reporter) -> int:
    program = parse_program(resolve_path(args.program).read_text())
    out = rp_to_brp(program, make_plan(args.maxstep, args.M, args.mode))
    text = format_program(out)
    if args.out:
        Path(args.out).write_text(text)
        text = f"wrote {args.out} ({len(out)} instructions)"
    rep.emit("ok", None, text.rstrip("\n"), instructions=len(out))
    return 0


def _rate_line(label: str, hits: int, trials: int) -> tuple[str, dict]:
    rate = hits / trials
    sigma = math.sqrt(rate * (1 - rate) / trials)
    lo, hi = max(0.0, rate - 3 * sigma), min(1.0, rate + 3 * sigma)
    text = f"{label:<24} {trials:>8} {hits:>8} {rate:>8.4f}  [{lo:.4f}, {hi:.4f}]"
    return text, {"label": label, "trials": trials, "accepts": hits, "rate": rate,
                  "lo3": lo, "hi3": hi}


def cmd_stats(args, rep: Reporter) -> int:
    base = effective_seed(args)
    if base is None:
        base = random.SystemRandom().randrange(1 << 32)
    rows = []
    program = parse_program(resolve_path(args.program).read_text())
    if args.target == "ram":
        targets = [("original", program)]
    else:
        targets = [(f"{mode} (3 runs)", rp_to_brp(program, make_plan(args.maxstep, args.M, mode)))
                   for mode in (RP_MODE, BPP_MODE)]
    for inp in args.input:
        for label, prog in targets:
            hits = 0
            for i in range(args.trials):
                res = run(prog, inp, args.budget, RandomSource.seeded(base + i))
                hits += res.accepted
            rows.append(_rate_line(f"{label} input={inp}", hits, args.trials))
    header = f"{'program':<24} {'trials':>8} {'accepts':>8} {'rate':>8}  3-sigma interval"
    rep.emit("ok", None, "\n".join([header] + [r[0] for r in rows]),
             table=[r[1] for r in rows], base_seed=base)
    return 0


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pelram", description=__doc__)
    src = ap.add_mutually_exclusive_group()
    src.add_argument("--seed", type=int, help="PRNG seed (env PELRAM_SEED is the fallback)")
    src.add_argument("--tape", help="oracle tape file of ASCII 0/1, read LSB-first per draw")
    ap.add_argument("--budget", type=int, default=1_000_000, help="RAM step budget")
    ap.add_argument("--bit-ceiling", type=int, default=DEFAULT_BIT_CEILING,
                    help="abort values longer than this many bits")
    ap.add_argument("--format", choices=("text", "json-lines"), default="text")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run-ram", help="run a RAM assembly program")
    p.add_argument("program")
    p.add_argument("--input", type=int, default=0)
    p.add_argument("--eliminate-shr", action="store_true",
                   help="rewrite the program without >> before running")
    p.set_defaults(func=cmd_run_ram)

    p = sub.add_parser("run-tm", help="run a Turing machine on a bounded tape")
    p.add_argument("tm")
    p.add_argument("--input", type=int, default=0)
    p.add_argument("--s", type=int, required=True, help="tape cells")
    p.add_argument("--max-steps", type=int, help="default: the ID-count bound B")
    p.set_defaults(func=cmd_run_tm)

    p = sub.add_parser("tableau", help="build, verify or corrupt tableaux")
    p.add_argument("action", choices=("build", "verify", "corrupt"))
    p.add_argument("tm")
    p.add_argument("--input", type=int, default=0)
    p.add_argument("--s", type=int, default=2)
    p.add_argument("--n", type=int, help="rows (default B)")
    p.add_argument("--max-rows", type=int, default=DEFAULT_MAX_ROWS)
    p.add_argument("--out", help="write the dump here (build)")
    p.add_argument("--dump", help="tableau dump file (verify)")
    p.add_argument("--bit", type=int, help="bit to flip (corrupt); random if omitted")
    p.add_argument("--field", choices=("T", "H", "S"), help="vector to corrupt (default T)")
    p.set_defaults(func=cmd_tableau)

    p = sub.add_parser("mapops", help="elementwise map arithmetic on small maps")
    p.add_argument("--op", choices=("add", "carry", "neg", "gt", "eq"), required=True)
    p.add_argument("--w", type=int, required=True)
    p.add_argument("--v", required=True, help="comma-separated elements")
    p.add_argument("--u", help="comma-separated elements")
    p.add_argument("--spacing", type=int, help="domain spacing (default w)")
    p.set_defaults(func=cmd_mapops)

    p = sub.add_parser("dilute", help="generate a sparse domain")
    p.add_argument("--target-w", type=int, required=True)
    p.add_argument("--k", type=int, required=True, help="bits per random draw")
    p.set_defaults(func=cmd_dilute)

    p = sub.add_parser("inputverify", help="candidates with the input pinned in the top bits")
    p.add_argument("--w-hat", type=int, required=True)
    p.add_argument("--w", type=int, required=True)
    p.add_argument("--input", type=int, default=0)
    p.add_argument("--k", type=int)
    p.add_argument("--lucky", action="store_true", help="use the blocks that make one index survive")
    p.set_defaults(func=cmd_inputverify)

    p = sub.add_parser("pelsim", help="randomized tableau-search simulation of a TM")
    p.add_argument("--tm", required=True)
    p.add_argument("--input", type=int, default=0)
    p.add_argument("--lucky-tape", action="store_true")
    p.add_argument("--k", type=int)
    p.add_argument("--log-rows", type=int)
    p.add_argument("--max-maxstep", type=int, default=4)
    p.add_argument("--variant", choices=(SCALE_VARIANT, INPUT_VERIFY_VARIANT),
                   default=SCALE_VARIANT)
    p.set_defaults(func=cmd_pelsim)

    p = sub.add_parser("rp2brp", help="collate rand(y) calls into one rand2 draw")
    p.add_argument("program")
    p.add_argument("--maxstep", type=int, default=16)
    p.add_argument("--M", type=int, required=True, help="bound on every rand(y) argument")
    p.add_argument("--mode", choices=(RP_MODE, BPP_MODE), default=RP_MODE)
    p.add_argument("--out")
    p.set_defaults(func=cmd_rp2brp)

    p = sub.add_parser("stats", help="Monte Carlo acceptance rates")
    p.add_argument("target", choices=("ram", "rp2brp"))
    p.add_argument("--program", default="rp_half.ram")
    p.add_argument("--input", type=int, nargs="+", default=[3, 4])
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--maxstep", type=int, default=16)
    p.add_argument("--M", type=int, default=6)
    p.set_defaults(func=cmd_stats)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    rep = Reporter(args)
    try:
        with bit_ceiling(args.bit_ceiling):
            return args.func(args, rep)
    except (PelramError, CliError, ValueError, OSError) as exc:
        msg = str(exc)
        if args.format == "json-lines":
            rep.emit("error", None, error=f"{type(exc).__name__}: {msg}")
        print(f"error: {msg}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
