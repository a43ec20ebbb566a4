from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from pelram.dilution import build_domain
from pelram.errors import PolicyViolation, ShapeError, TransformInapplicable
from pelram.meter import MNat, metered
from pelram.pelsim import (
    BPP_MODE, INPUT_VERIFY_VARIANT, RP_MODE, SimLimits, bpp_collated_error,
    bpp_three_run_error, input_verify, input_verify_blocks, lucky_tape, majority_of_three,
    make_plan, rp_collated_bound, rp_three_run_bound, rp_to_brp, simulate_pel, tetrate,
)
from pelram.ram.asm import parse_program
from pelram.ram.machine import run
from pelram.randsrc import RandomSource
from pelram.wordmap import scale_domain

from conftest import load_ram, load_tm

LOG_ROWS = 8


def expected_prefix_set(w_hat: int, w: int, inp: int) -> list[int]:
    return [x for x in range(1 << w_hat) if x >> (w_hat - w) == inp]


def crafted_input_verify(w_hat: int, w: int, inp: int):
    const, counter = input_verify_blocks(w_hat)
    ew = 1 << w_hat
    width = ew << ew
    rng = RandomSource.from_values([(const, width), (counter, width)])
    return input_verify(1, width + 1, w_hat, inp, w, rng, width)


def test_tetrate_examples():
    assert tetrate(2, 3) == 16
    assert tetrate(2, 4) == 65536
    assert tetrate(3, 2) == 27
    assert tetrate(5, 1) == 5


@pytest.mark.parametrize("w_hat", [2, 3])
def test_input_verify_crafted_exact(w_hat):
    for w in range(1, w_hat + 1):
        for inp in range(1 << w):
            out = crafted_input_verify(w_hat, w, inp)
            assert out.valid
            assert sorted(out.elements().values()) == expected_prefix_set(w_hat, w, inp)


def test_input_verify_example_values():
    out = crafted_input_verify(3, 2, 2)
    assert sorted(out.elements().values()) == [0b100, 0b101]


def test_input_verify_all_zero_tape_is_empty():
    ew = 1 << 3
    width = ew << ew
    rng = RandomSource.from_values([(0, width), (0, width)])
    out = input_verify(1, width + 1, 3, 1, 2, rng, width)
    assert out.I == 0 and out.valid


def test_input_verify_random_tapes_never_violate():
    r = random.Random(11)
    for trial in range(100):
        w_hat = 4 if trial < 20 else r.choice([2, 3])
        w = r.randint(1, w_hat)
        inp = r.randrange(1 << w)
        ew = 1 << w_hat
        width = ew << ew
        Ix = 1 | (1 << (width + 1))
        k = 2 * (width + 1)
        out = input_verify(Ix, width + 1, w_hat, inp, w, RandomSource.seeded(r.getrandbits(32)), k)
        assert out.valid
        allowed = set(expected_prefix_set(w_hat, w, inp))
        assert set(out.elements().values()) <= allowed


def test_input_verify_shape_checks():
    with pytest.raises(ShapeError):
        input_verify(1, 10, 3, 0, 2, RandomSource.seeded(0), 64)
    with pytest.raises(ShapeError):
        input_verify(1, 1 << 12, 3, 4, 2, RandomSource.seeded(0), 64)


@pytest.mark.parametrize("name,inp,accepted,message", [
    ("accept0.tm", 0, True, "T accepts"),
    ("accept0.tm", 2, True, "T accepts"),
    ("accept0.tm", 1, False, "T rejects"),
    ("bit1.tm", 2, True, "T accepts"),
    ("bit1.tm", 1, False, "T rejects"),
])
def test_lucky_tape_runs(name, inp, accepted, message):
    spec = load_tm(name)
    lt = lucky_tape(spec, inp, log_rows=LOG_ROWS)
    res = simulate_pel(spec, inp, lt.rng, SimLimits(max_maxstep=1, k=lt.k, log_rows=LOG_ROWS))
    assert res.accepted is accepted
    assert res.diagnostic == message
    assert res.steps_used > 0


def test_random_runs_never_accept_outside_language():
    spec = load_tm("accept0.tm")
    k = lucky_tape(spec, 1, log_rows=LOG_ROWS).k
    limits = SimLimits(max_maxstep=1, k=k, log_rows=LOG_ROWS)
    for seed in range(500):
        assert not simulate_pel(spec, 1, RandomSource.seeded(seed), limits).accepted


def test_default_limits_reject_with_diagnostic():
    spec = load_tm("accept0.tm")
    res = simulate_pel(spec, 0, RandomSource.seeded(1))
    assert not res.accepted and "ResourceLimit" in res.diagnostic
    res = simulate_pel(spec, 0, RandomSource.seeded(1), SimLimits(variant=INPUT_VERIFY_VARIANT))
    assert not res.accepted and res.diagnostic


def test_short_tape_rejects():
    spec = load_tm("accept0.tm")
    res = simulate_pel(spec, 0, RandomSource.from_tape("0101"),
                       SimLimits(max_maxstep=1, k=4616, log_rows=LOG_ROWS))
    assert not res.accepted and "TapeExhausted" in res.diagnostic


def _ops(fn, *args) -> int:
    with metered() as m:
        fn(*args)
    return m.ops


def test_scale_cost_is_linear_in_input_length():
    I = MNat((1 << 40) | 1)
    costs = [_ops(scale_domain, I, MNat((1 << n) - 1)) for n in range(1, 12)]
    diffs = {b - a for a, b in zip(costs, costs[1:])}
    assert len(diffs) == 1 and diffs.pop() > 0


def test_dilution_cost_is_linear_in_rounds():
    costs = [_ops(build_domain, t, 64, RandomSource.seeded(3)) for t in (2, 9, 4609)]
    assert costs[2] - costs[1] == costs[1] - costs[0] > 0


def test_bound_functions_grid():
    for i in range(1, 101):
        p = i / 100
        assert rp_collated_bound(p) <= p
        assert rp_three_run_bound(p) >= p - 1e-12
    for i in range(0, 101):
        e = i / 300
        assert bpp_collated_error(e) <= e + 1e-12
        assert bpp_three_run_error(e) <= e + 1e-12
    assert bpp_three_run_error(1 / 3) < 1 / 3


def test_majority_of_three_by_enumeration():
    for i in range(11):
        q = i / 10
        brute = sum(q ** sum(o) * (1 - q) ** (3 - sum(o))
                    for o in itertools.product((0, 1), repeat=3) if sum(o) >= 2)
        assert majority_of_three(q) == pytest.approx(brute)


def test_plan_sizes():
    plan = make_plan(16, 6)
    assert plan.k_tilde == 3 << 16 and plan.repetitions == 3
    assert make_plan(16, 6, BPP_MODE).k_tilde == plan.k_tilde + 2
    assert (plan.M ** plan.maxstep).bit_length() <= plan.k_tilde


def test_collated_draws_are_mixed_radix_digits():
    src = """op +,<<,bool,rand
    R3 <= 1 + 1
    R3 <= R3 + 1
    R1 <= rand(R3)
    R4 <= R3 + 1
    R4 <= R4 + 1
    R2 <= rand(R4)
    R0 <= 1
    halt
"""
    plan = make_plan(16, 5)
    q = rp_to_brp(parse_program(src), plan)
    r = random.Random(8)
    for _ in range(50):
        X = r.getrandbits(plan.k_tilde)
        res = run(q, 0, 10**5, RandomSource.from_values([(X, plan.k_tilde)]))
        assert res.accepted
        assert (res.registers.get(1, 0), res.registers.get(2, 0)) == (X % 3, (X // 3) % 5)


def test_step_bound_stops_long_repetitions():
    q = rp_to_brp(load_ram("loop.ram"), make_plan(4, 2))
    res = run(q, 0, 10**4, RandomSource.seeded(0))
    assert res.outcome == "rejected"


def test_transform_preconditions():
    with pytest.raises(TransformInapplicable):
        rp_to_brp(parse_program("op +,<<,bool,rand\n R1 <= R@0\n halt"), make_plan(4, 2))
    with pytest.raises(PolicyViolation):
        rp_to_brp(parse_program("op +,<<,bool,rand2\n R1 <= rand2(R0)\n halt"), make_plan(4, 2))


def test_transformed_program_only_uses_power_of_two_draws():
    q = rp_to_brp(load_ram("rp_half.ram"), make_plan(16, 6))
    ops = {i.op.name for i in q.instructions}
    assert "RAND" not in ops and "RAND2" in ops


@pytest.mark.parametrize("mode", [RP_MODE, BPP_MODE])
def test_collated_acceptance_rates(mode):
    q = rp_to_brp(load_ram("rp_half.ram"), make_plan(16, 6, mode))
    n = 1500
    hits = sum(run(q, 3, 10**5, RandomSource.seeded(i)).accepted for i in range(n))
    sigma = (0.25 / n) ** 0.5
    assert hits / n >= 0.5 - 3 * sigma
    assert not any(run(q, 4, 10**5, RandomSource.seeded(i)).accepted for i in range(300))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 63), st.integers(0, 2**32))
def test_collation_keeps_one_sided_error(x, seed):
    q = rp_to_brp(load_ram("rp_half.ram"), make_plan(16, 6))
    res = run(q, x, 10**5, RandomSource.seeded(seed))
    if x % 2 == 0:
        assert not res.accepted
