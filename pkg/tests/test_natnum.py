from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from pelram.errors import InexactDivision, ResourceLimit
from pelram.natnum import (
    PrimOp, bit_ceiling, bnot, clr, eval_prim, le_synth, monus, monus_synth, set_fill,
)

nat = st.integers(min_value=0, max_value=1 << 200)


@pytest.mark.parametrize("a,want", [(0, 0), (5, 2), (8, 7)])
def test_bnot_examples(a, want):
    assert bnot(a) == want


@pytest.mark.parametrize("a,want", [(0, 0), (5, 7), (8, 15)])
def test_set_fill_examples(a, want):
    assert set_fill(a) == want


def test_monus_examples():
    assert monus(7, 3) == 4
    assert monus(3, 7) == 0
    assert monus_synth(12, 5) == 7


def test_le_examples():
    assert le_synth(3, 3)
    assert not le_synth(4, 3)


def test_clr_examples():
    assert clr(0b1111, 0b0101) == 0b1010
    assert clr(123, 0) == 123
    assert clr(0b110110, 0b1101100) == 0b0010010


def test_prim_examples():
    assert eval_prim(PrimOp.SHL, 3, 4) == 48
    assert eval_prim(PrimOp.EXACTDIV, 48, 16) == 3
    with pytest.raises(InexactDivision):
        eval_prim(PrimOp.EXACTDIV, 5, 2)


def test_bit_ceiling_enforced():
    with bit_ceiling(64):
        with pytest.raises(ResourceLimit):
            eval_prim(PrimOp.SHL, 1, 100)


@given(nat)
def test_set_fill_is_all_ones_cover(a):
    s = set_fill(a)
    assert s == (1 << a.bit_length()) - 1
    assert s & (s + 1) == 0 and s >= a


@given(nat)
def test_bnot_involution_below_msb(a):
    assert bnot(a) | a == set_fill(a)
    assert bnot(a) & a == 0


@given(nat, nat)
def test_le_and_monus_synth_large(a, b):
    assert le_synth(a, b) == (a <= b)
    assert monus_synth(a, b) == max(a - b, 0)


@given(nat, nat)
def test_results_never_negative(a, b):
    for op in PrimOp:
        if op in (PrimOp.SHL, PrimOp.SHR, PrimOp.MUL):
            continue
        try:
            assert eval_prim(op, a, b) >= 0
        except ArithmeticError:
            pass
