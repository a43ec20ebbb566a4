from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from pelram.errors import ShapeError
from pelram.tableau import (
    EncodedVector, Tableau, build_tableau, classify_terminal, ones_vector, times_count,
    verify_tableau,
)
from pelram.tm import encode_id, run_tm_reference, tm_step_reference

from conftest import load_tm

CASES = [("accept0.tm", 0), ("accept0.tm", 1), ("bit1.tm", 2), ("bit1.tm", 1),
         ("rightmover.tm", 0), ("oscillator.tm", 3)]


@given(st.integers(1, 9), st.lists(st.integers(0, 511), max_size=20))
def test_encoded_vector_round_trip(m, elems):
    elems = [e & ((1 << m) - 1) for e in elems]
    v = EncodedVector.pack(m, elems)
    assert v.elements() == elems
    assert v.V < 1 << (m * len(elems))


def test_encoded_vector_rejects_overflow():
    with pytest.raises(ShapeError):
        EncodedVector(3, 1 << 6, 2)


@given(st.integers(1, 12), st.integers(0, 70))
def test_ones_vector_and_times_count(m, n):
    assert times_count(m, n) == m * n
    assert ones_vector(m, n) == sum(1 << (m * i) for i in range(n))


def test_single_row_is_initial_id():
    spec = load_tm("bit1.tm")
    t = build_tableau(spec, 5, 3, 1)
    assert t.row(0) == encode_id(spec, 5, 0, 0, 3)


@pytest.mark.parametrize("name,inp", CASES)
def test_build_verify_matches_reference(name, inp):
    spec = load_tm(name)
    s = 2
    n = spec.id_bound(s)
    t = build_tableau(spec, inp, s, n)
    rows = t.rows()
    for a, b in zip(rows, rows[1:]):
        assert tm_step_reference(spec, a) == b
    status = verify_tableau(t, spec, inp)
    assert status.valid
    assert status.terminal == run_tm_reference(spec, inp, s, n).kind
    assert t.I_s == t.I << t.s


def test_status_text():
    spec = load_tm("accept0.tm")
    t = build_tableau(spec, 0, 2, spec.id_bound(2))
    assert str(verify_tableau(t, spec, 0)) == "valid, accepted"
    assert str(verify_tableau(t.with_bit_flipped("T", 17), spec, 0)) == "invalid"


def test_random_single_bit_corruptions_detected():
    spec = load_tm("bit1.tm")
    t = build_tableau(spec, 2, 2, spec.id_bound(2))
    r = random.Random(2024)
    for _ in range(1000):
        field = r.choice("THS")
        bad = t.with_bit_flipped(field, r.randrange(t.bits))
        assert not verify_tableau(bad, spec, 2).valid


@settings(max_examples=200, deadline=None)
@given(st.sampled_from("THS"), st.integers(0, 4 * 64 - 1))
def test_every_small_corruption_detected(field, bit):
    spec = load_tm("oscillator.tm")
    t = build_tableau(spec, 1, 1, 64)
    assert not verify_tableau(t.with_bit_flipped(field, bit % t.bits), spec, 1).valid


def test_interior_row_tamper_and_wrong_input():
    spec = load_tm("bit1.tm")
    t = build_tableau(spec, 2, 2, 64)
    assert not verify_tableau(t.with_bit_flipped("T", t.m * 3), spec, 2).valid
    assert not verify_tableau(t, spec, 3).valid


def test_bits_above_the_vectors_are_rejected():
    spec = load_tm("bit1.tm")
    t = build_tableau(spec, 2, 2, 16)
    assert not verify_tableau(t.with_bit_flipped("S", t.bits + 3), spec, 2).valid


def test_classify_terminal():
    spec = load_tm("bit1.tm")
    assert classify_terminal(encode_id(spec, 0, 1, spec.accept_state, 3), spec) == "accepted"
    assert classify_terminal(encode_id(spec, 0, 1, spec.exceeded_state, 3), spec) == "exceeded_tape"
    osc = load_tm("oscillator.tm")
    t = build_tableau(osc, 0, 2, osc.id_bound(2))
    assert verify_tableau(t, osc, 0).terminal == "nonterminating"


def test_dump_restore_and_shape_errors():
    spec = load_tm("accept0.tm")
    t = build_tableau(spec, 0, 2, 256)
    text = t.dump()
    assert Tableau.restore(text) == t
    with pytest.raises(ShapeError):
        Tableau.restore(text[:len(text) // 2])
    with pytest.raises(ShapeError):
        Tableau.restore(text + "ff")


def test_reversed_rows_put_initial_id_on_top():
    spec = load_tm("bit1.tm")
    t = build_tableau(spec, 2, 3, 8)
    r = t.reversed_rows()
    assert r.row(r.n - 1) == t.row(0)
    assert r.row(0) == t.row(t.n - 1)
