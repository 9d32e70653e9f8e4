"""Scalar bit kernel semantics, pinned against hand-worked values."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bytestore import bits

WORDS = st.integers(min_value=0, max_value=0xFFFFFFFF)


def test_pdep_worked_example():
    # deposit low bits of source into the set positions of the mask
    assert bits.pdep(0b1011, 0b11010010) == 0b10010010


def test_pext_worked_example():
    assert bits.pext(0b10010010, 0b11010010) == 0b1011


def test_erase_propagate_worked_examples():
    # x = (01010010), E(x) clears the rightmost 1, P(x) sets everything
    # strictly above it
    x = 0b01010010
    assert bits.erase_rightmost(x) == 0b01010000
    assert bits.propagate_rightmost(x, width=8) == 0b11111100
    assert bits.lowest_set_index(x, width=8) == 1


def test_zero_edge_cases():
    assert bits.erase_rightmost(0) == 0
    assert bits.propagate_rightmost(0) == 0
    assert bits.popcount(0) == 0
    with pytest.raises(ValueError):
        bits.lowest_set_index(0)


def test_pdep_pext_exhaustive_small():
    # full 12-bit cross-check: pext inverts pdep on the mask subspace
    for mask in range(0, 1 << 12, 7):  # stride keeps runtime sane
        k = bits.popcount(mask)
        for src in range(1 << k):
            dep = bits.pdep(src, mask)
            assert dep & ~mask == 0
            assert bits.pext(dep, mask) == src


@given(src=WORDS, mask=WORDS)
def test_pdep_stays_inside_mask(src, mask):
    assert bits.pdep(src, mask) & ~mask == 0


@given(src=WORDS, mask=WORDS)
def test_pext_pdep_round_trip(src, mask):
    assert bits.pdep(bits.pext(src, mask), mask) == src & mask


@given(src=WORDS, mask=WORDS)
def test_pdep_popcount_conservation(src, mask):
    k = bits.popcount(mask)
    assert bits.popcount(bits.pdep(src, mask)) == bits.popcount(
        src & ((1 << k) - 1))


@given(x=st.integers(min_value=1, max_value=0xFFFFFFFF))
def test_lowest_set_index_matches_arithmetic(x):
    assert bits.lowest_set_index(x) == (x & -x).bit_length() - 1


@given(x=st.integers(min_value=1, max_value=0xFFFFFFFF))
def test_erase_then_rebuild(x):
    low = 1 << bits.lowest_set_index(x)
    assert bits.erase_rightmost(x) | low == x


@given(x=WORDS)
def test_popcount_matches_numpy(x):
    assert bits.popcount(x) == int(np.bitwise_count(np.uint32(x)))
