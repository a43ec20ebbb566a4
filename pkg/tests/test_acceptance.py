"""Acceptance criteria 1-10, one test each, each printing a PASS/FAIL line."""

from __future__ import annotations

import random
import time

import pytest

from pelram.dilution import bootstrap_domain, dilute_step
from pelram.natnum import le_synth, monus_synth
from pelram.pelsim import (
    BPP_MODE, RP_MODE, SimLimits, input_verify, input_verify_blocks, lucky_tape, make_plan,
    rp_to_brp, simulate_pel,
)
from pelram.ram.machine import run
from pelram.ram.shiftelim import eliminate_right_shifts
from pelram.randsrc import RandomSource
from pelram.tableau import EncodedVector, build_tableau, ones_vector, verify_tableau
from pelram.tm import all_ids, compile_step_circuit, run_tm_reference, tm_step_reference
from pelram.wordmap import Verdict, map_geometry, pack_candidates, verify_parallel

from conftest import load_ram, load_tm
from test_wordmap import SCALAR, check_elementwise, random_map_case


@pytest.fixture
def report(capsys):
    """Print one PASS/FAIL line for the criterion, visible even under output capture."""
    lines = []
    yield lines.append
    with capsys.disabled():
        for ok, n, text in lines:
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {text}")


def sparse_oracle(I: int, w: int) -> bool:
    """Spacing check independent of the library's scan."""
    if I.bit_count() < 64:
        digits = format(I, "b")[::-1]
        pos = [i for i, ch in enumerate(digits) if ch == "1"]
        return all(b - a >= w for a, b in zip(pos, pos[1:]))
    return all(I & (I >> d) == 0 for d in range(1, w))


def test_criterion_01_primitive_oracles(report):
    t0 = time.perf_counter()
    bad = 0
    for a in range(4096):
        for b in range(4096):
            if le_synth(a, b) != (a <= b):
                bad += 1
            if monus_synth(a, b) != (a - b if a > b else 0):
                bad += 1
    dt = time.perf_counter() - t0
    ok = bad == 0 and dt < 60
    report((ok, 1, f"le_synth/monus_synth exhaustive a,b<4096, mismatches={bad}, {dt:.1f}s"))
    assert bad == 0
    assert dt < 60


def test_criterion_02_map_elementwise(report):
    t0 = time.perf_counter()
    bad = cases = 0
    for w in (2, 3):
        vals = range(1 << w)
        for name in SCALAR:
            for v0 in vals:
                for v1 in vals:
                    for u0 in vals:
                        for u1 in vals:
                            cases += 1
                            bad += not check_elementwise(name, [v0, v1], [u0, u1], [0, w], w)
    r = random.Random(2)
    for w in (4, 8):
        for _ in range(10**4):
            vs, us, idx = random_map_case(r, w)
            for name in SCALAR:
                cases += 1
                bad += not check_elementwise(name, vs, us, idx, w)
    dt = time.perf_counter() - t0
    report((bad == 0 and dt < 120, 2, f"{cases} map cases, mismatches={bad}, {dt:.1f}s"))
    assert bad == 0
    assert dt < 120


def test_criterion_03_step_circuit(report):
    t0 = time.perf_counter()
    bad = checked = 0
    for name in ("accept0.tm", "bit1.tm", "oscillator.tm"):
        spec = load_tm(name)
        assert spec.c <= 3
        circuit = compile_step_circuit(spec)
        for s in range(1, 5):
            ids = list(all_ids(spec, s))
            want = [tm_step_reference(spec, d) for d in ids]
            for d, e in zip(ids, want):
                checked += 1
                bad += circuit.apply(d) != e
            m = spec.id_width(s)
            I = ones_vector(m, len(ids))
            packed = [EncodedVector.pack(m, [getattr(d, f) for d in ids]).V
                      for f in ("tape", "head_pow", "state_head")]
            out = circuit(*packed, I, I << s)[:3]
            full = (1 << m * len(ids)) - 1
            for vec, f in zip(out, ("tape", "head_pow", "state_head")):
                got = EncodedVector(m, vec & full, len(ids)).elements()
                bad += got != [getattr(e, f) for e in want]
    dt = time.perf_counter() - t0
    report((bad == 0 and dt < 60, 3, f"{checked} IDs plus packed application, mismatches={bad}, {dt:.1f}s"))
    assert bad == 0
    assert dt < 60


def test_criterion_04_tableau_uniqueness(report):
    t0 = time.perf_counter()
    spec = load_tm("bit1.tm")
    s = 2
    t = build_tableau(spec, 2, s, spec.id_bound(s))
    status = verify_tableau(t, spec, 2)
    r = random.Random(4)
    missed = 0
    trials = 2000
    for _ in range(trials):
        bad = t.with_bit_flipped(r.choice("THS"), r.randrange(t.bits))
        missed += verify_tableau(bad, spec, 2).valid
    dt = time.perf_counter() - t0
    ok = status.valid and status.terminal == "accepted" and missed == 0 and dt < 60
    report((ok, 4, f"build->verify '{status}', {trials} corruptions, undetected={missed}, {dt:.1f}s"))
    assert status.valid and status.terminal == run_tm_reference(spec, 2, s, t.n).kind
    assert missed == 0
    assert dt < 60


def test_criterion_05_parallel_injection(report):
    spec = load_tm("accept0.tm")
    s = 2
    g = map_geometry(spec, s)          # full B rows
    t = build_tableau(spec, 0, s, g.rows)
    r = random.Random(5)
    garbage = {i * g.w_hat: r.getrandbits(g.w_hat) for i in (0, 1, 3, 4)}
    mixed = pack_candidates({**garbage, 2 * g.w_hat: t.composite()}, g.w_hat)
    only = pack_candidates(garbage, g.w_hat)
    v1 = verify_parallel(mixed.L, mixed.I, s, 0, spec, w_hat=g.w_hat)
    v2 = verify_parallel(only.L, only.I, s, 0, spec, w_hat=g.w_hat)
    ok = v1 is Verdict.ACCEPTS and v2 is Verdict.SIMULATION_FAILED
    report((ok, 5, f"w_hat={g.w_hat}: with tableau '{v1.message}', garbage only '{v2.message}'"))
    assert v1 is Verdict.ACCEPTS
    assert v2 is Verdict.SIMULATION_FAILED


def test_criterion_06_dilution_sparseness(report):
    t0 = time.perf_counter()
    k = 1 << 16
    full = (1 << k) - 1
    r = random.Random(6)
    tapes = [(0, 0, 0), (full, full, full)]
    tapes += [(r.getrandbits(k), r.getrandbits(k), r.getrandbits(k)) for _ in range(10**4)]
    bad = 0
    widths = set()
    for r0, r1, r2 in tapes:
        d0 = bootstrap_domain(r0)
        d1 = dilute_step(d0, r1, k)
        d2 = dilute_step(d1, r2, k)
        widths.add((d0.w, d1.w, d2.w))
        bad += not (sparse_oracle(d0.I, 2) and sparse_oracle(d1.I, 9) and sparse_oracle(d2.I, 4609))
    dt = time.perf_counter() - t0
    ok = bad == 0 and widths == {(2, 9, 4609)} and dt < 120
    report((ok, 6, f"{len(tapes)} tapes, widths={sorted(widths)}, violations={bad}, {dt:.1f}s"))
    assert bad == 0
    assert widths == {(2, 9, 4609)}
    assert dt < 120


def test_criterion_07_input_pinning(report):
    bad = 0
    for w_hat in (2, 3):
        const, counter = input_verify_blocks(w_hat)
        ew = 1 << w_hat
        width = ew << ew
        for w in range(1, w_hat + 1):
            for inp in range(1 << w):
                rng = RandomSource.from_values([(const, width), (counter, width)])
                out = input_verify(1, width + 1, w_hat, inp, w, rng, width)
                want = [x for x in range(1 << w_hat) if x >> (w_hat - w) == inp]
                bad += sorted(out.elements().values()) != want
    r = random.Random(7)
    violations = 0
    for _ in range(100):
        w_hat = r.choice([2, 3])
        w = r.randint(1, w_hat)
        inp = r.randrange(1 << w)
        ew = 1 << w_hat
        width = ew << ew
        Ix = sum(1 << (j * (width + 1)) for j in range(4))
        k = 4 * (width + 1)
        out = input_verify(Ix, width + 1, w_hat, inp, w, RandomSource.seeded(r.getrandbits(32)), k)
        violations += any(v >> (w_hat - w) != inp for v in out.elements().values())
    ok = bad == 0 and violations == 0
    report((ok, 7, f"crafted mismatches={bad}, random-tape violations={violations}/100"))
    assert bad == 0
    assert violations == 0


def test_criterion_08_end_to_end(report):
    spec = load_tm("accept0.tm")
    log_rows = 8
    results = {}
    for inp in (0, 1):
        lt = lucky_tape(spec, inp, log_rows=log_rows)
        res = simulate_pel(spec, inp, lt.rng, SimLimits(max_maxstep=1, k=lt.k, log_rows=log_rows))
        results[inp] = res
    k = lucky_tape(spec, 1, log_rows=log_rows).k
    limits = SimLimits(max_maxstep=1, k=k, log_rows=log_rows)
    false_accepts = sum(simulate_pel(spec, 1, RandomSource.seeded(seed), limits).accepted
                        for seed in range(10**4))
    ok = results[0].accepted and not results[1].accepted and false_accepts == 0
    report((ok, 8, f"lucky tape: in-language '{results[0].diagnostic}', out-of-language "
                   f"'{results[1].diagnostic}'; false accepts {false_accepts}/10000 "
                   f"(tableau length 2^{log_rows})"))
    assert results[0].accepted
    assert not results[1].accepted
    assert false_accepts == 0


def test_criterion_09_rp_to_brp(report):
    program = load_ram("rp_half.ram")
    trials = 10**4
    p = 0.5
    sigma = (p * (1 - p) / trials) ** 0.5
    lines = []
    ok = True
    for mode in (RP_MODE, BPP_MODE):
        q = rp_to_brp(program, make_plan(16, 6, mode))
        hits = sum(run(q, 3, 10**5, RandomSource.seeded(i)).accepted for i in range(trials))
        zero = sum(run(q, 4, 10**5, RandomSource.seeded(i)).accepted for i in range(trials))
        rate = hits / trials
        ok &= rate >= p - 3 * sigma and zero == 0
        lines.append(f"{mode}: {rate:.4f} (need >= {p - 3 * sigma:.3f}), out-of-language {zero}")
    report((ok, 9, "; ".join(lines)))
    assert ok


def test_criterion_10_shift_elimination(report):
    bad = 0
    names = ("shr_bit2.ram", "shr_parity.ram", "shr_nibbles.ram")
    for name in names:
        p = load_ram(name)
        q = eliminate_right_shifts(p)
        for x in range(256):
            bad += run(p, x, 10**6).outcome != run(q, x, 10**6).outcome
    report((bad == 0, 10, f"{len(names)} programs x inputs 0..255, mismatches={bad}"))
    assert bad == 0
