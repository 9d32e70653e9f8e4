"""Variable byte slice layout: construction, the masked scan kernel in both
its vectorized and reference forms, lookups, and the byte accounting."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bytestore.bitvector import ResultBitVector as BitVector
from bytestore.predicate import LaneConfig, Op, ResolvedPredicate
from bytestore.vbs import (
    build_vbs,
    lookup_serial,
    lookup_vbs,
    scan_serial,
    scan_vbs,
    vbs_size_report,
)

COMPARE_OPS = (Op.EQ, Op.NE, Op.LT, Op.LE, Op.GT, Op.GE)


def padded(code, length, width):
    return int(code) << (8 * (width - int(length)))


def naive_scan(codes, lens, op, lit, lit_len, width):
    vals = [padded(c, l, width) for c, l in zip(codes, lens)]
    target = padded(lit, lit_len, width)
    table = {
        Op.EQ: lambda v: v == target, Op.NE: lambda v: v != target,
        Op.LT: lambda v: v < target, Op.LE: lambda v: v <= target,
        Op.GT: lambda v: v > target, Op.GE: lambda v: v >= target,
    }
    return [i for i, v in enumerate(vals) if table[op](v)]


def four_row_column():
    return build_vbs([0x81, 0xC0, 0x77A9, 0x8189], [1, 1, 2, 2])


# --- construction -----------------------------------------------------------


def test_build_places_bytes_per_slice():
    col = build_vbs([0xC1, 0x887D], [1, 2])
    assert col.max_len == 2
    assert col.slices[0][:2].tolist() == [0xC1, 0x88]
    assert col.slices[1].tolist() == [0x7D]
    assert int(col.mask_words(2)[0]) == 0b10


def test_existence_word_pattern():
    lens = [1, 2, 1, 1, 1, 2, 1, 1]
    col = build_vbs([0x0101 if l == 2 else 0x01 for l in lens], lens)
    assert int(col.mask_words(2)[0]) == 0x22  # rows 1 and 5


def test_build_rejects_bad_input():
    with pytest.raises(ValueError):
        build_vbs([], [])
    with pytest.raises(ValueError):
        build_vbs([1, 2], [1])
    with pytest.raises(ValueError):
        build_vbs([1], [0])
    with pytest.raises(ValueError):
        build_vbs([1], [9])
    with pytest.raises(ValueError):
        build_vbs([0x1FF], [1])  # code wider than its claimed length


def test_size_report_accounting():
    # 32 codes: 16 one-byte, 10 two-byte (of which 6 carry a third byte)
    lens = [3] * 6 + [2] * 4 + [1] * 22
    codes = [0x010101] * 6 + [0x0101] * 4 + [0x01] * 22
    col = build_vbs(codes, lens)
    rep = vbs_size_report(col)
    assert rep["slice_bytes"] == [32, 10, 6]
    assert rep["mask_bytes"] == 8
    assert rep["avg_bits_per_code"] == pytest.approx(14.0)
    assert rep["total_bytes"] == 56 + rep["directory_bytes"]


# --- worked scan examples ---------------------------------------------------


def test_scan_greater_one_byte_literal():
    col = four_row_column()
    out, stats = scan_vbs(col, ResolvedPredicate.compare(Op.GT, 0x81, 1))
    assert out.to_indices().tolist() == [1, 3]
    assert stats.bytes_loaded.tolist() == [32, 0]
    assert stats.block_depth.tolist() == [1]
    assert stats.mask_bytes == 4


def test_scan_greater_two_byte_literal_still_one_slice():
    # no first byte equals the literal's first byte, so slice 2 is never read
    col = four_row_column()
    out, stats = scan_vbs(col, ResolvedPredicate.compare(Op.GT, 0x8050, 2))
    assert out.to_indices().tolist() == [0, 1, 3]
    assert stats.bytes_loaded.tolist() == [32, 0]
    assert stats.block_depth.tolist() == [1]
    assert stats.mask_bytes == 4


def test_scan_equal_short_literal():
    col = four_row_column()
    out, stats = scan_vbs(col, ResolvedPredicate.compare(Op.EQ, 0xC0, 1))
    assert out.to_indices().tolist() == [1]
    assert stats.bytes_loaded.tolist() == [32, 0]
    assert stats.block_depth.tolist() == [1]


def test_scan_descends_when_prefixes_match():
    col = four_row_column()
    out, stats = scan_vbs(col, ResolvedPredicate.compare(Op.GT, 0x8150, 2))
    assert out.to_indices().tolist() == [1, 3]  # 0x8189 > 0x8150 needs byte 2
    assert stats.block_depth.tolist() == [2]
    assert stats.bytes_loaded[1] > 0


def test_trivial_predicates_touch_nothing():
    col = four_row_column()
    out, stats = scan_vbs(col, ResolvedPredicate.constant(True))
    assert out.count() == 4
    assert stats.total_bytes == 0
    assert stats.blocks_skipped == 1
    out, stats = scan_vbs(col, ResolvedPredicate.constant(False))
    assert out.count() == 0
    mask = BitVector.from_indices(4, [2])
    out, _ = scan_vbs(col, ResolvedPredicate.constant(True), mask=mask)
    assert out.to_indices().tolist() == [2]


# --- lookups ----------------------------------------------------------------


def test_lookup_returns_padded_codes():
    col = four_row_column()
    sel = BitVector.from_indices(4, [2, 3])
    out, stats = lookup_vbs(col, sel)
    assert out.tolist() == [0x77A9, 0x8189]
    assert stats.levels_touched == 2
    assert stats.bytes_loaded == 4  # two first bytes, two second bytes

    out, stats = lookup_vbs(col, BitVector.from_indices(4, [0]))
    assert out.tolist() == [0x8100]
    assert stats.levels_touched == 1
    assert stats.bytes_loaded == 1

    out, stats = lookup_vbs(col, BitVector.zeros(4))
    assert out.tolist() == []
    assert stats.total_bytes == 0


def test_lookup_serial_agrees():
    rng = np.random.default_rng(5)
    lens = rng.integers(1, 4, size=200)
    codes = [int(rng.integers(1 << (8 * (l - 1)) if l > 1 else 1,
                              1 << (8 * l))) | 1 for l in lens]
    col = build_vbs(codes, lens)
    sel = BitVector.from_bools(rng.random(200) < 0.3)
    fast, _ = lookup_vbs(col, sel)
    assert fast.tolist() == lookup_serial(col, sel).tolist()


def test_lookup_serial_requires_32_lanes():
    col = build_vbs([1, 2], [1, 1], LaneConfig(16))
    with pytest.raises(NotImplementedError):
        lookup_serial(col, BitVector.ones(2))


# --- randomized agreement: vectorized vs reference vs naive ------------------


def random_column(rng, n, max_len=3, lanes=None):
    lens = rng.integers(1, max_len + 1, size=n)
    lo = 1 << (8 * (lens - 1))
    lo[lens == 1] = 1
    hi = 1 << (8 * lens.astype(np.int64))
    codes = rng.integers(lo, hi)
    codes |= 1  # keep final bytes nonzero
    if lanes is None:
        return build_vbs(codes, lens)
    return build_vbs(codes, lens, lanes)


def literal_pool(codes, lens, rng):
    pool = []
    rows = rng.integers(0, len(codes), size=4)
    for r in rows:
        pool.append((int(codes[r]), int(lens[r])))
    pool.append((1, 1))
    pool.append((0xFF, 1))
    pool.append((int(codes[rows[0]]) ^ 1, int(lens[rows[0]])))
    return pool


def assert_same_scan(col, pred, mask=None, threads=1):
    vec_out, vec_st = scan_vbs(col, pred, mask=mask, threads=threads)
    ser_out, ser_st = scan_serial(col, pred, mask=mask)
    assert vec_out == ser_out
    assert vec_st.levels == ser_st.levels
    assert vec_st.blocks_total == ser_st.blocks_total
    assert vec_st.blocks_skipped == ser_st.blocks_skipped
    assert vec_st.mask_bytes == ser_st.mask_bytes
    assert vec_st.bytes_loaded.tolist() == ser_st.bytes_loaded.tolist()
    assert vec_st.words_loaded.tolist() == ser_st.words_loaded.tolist()
    assert vec_st.block_depth.tolist() == ser_st.block_depth.tolist()
    return vec_out, vec_st


def test_vectorized_matches_reference_and_naive():
    rng = np.random.default_rng(11)
    for n in (5, 32, 97, 1000):
        lens = rng.integers(1, 4, size=n)
        lo = np.where(lens == 1, 1, 1 << (8 * (lens - 1)))
        codes = rng.integers(lo, 1 << (8 * lens.astype(np.int64))) | 1
        col = build_vbs(codes, lens)
        for lit, lit_len in literal_pool(codes, lens, rng):
            for op in COMPARE_OPS:
                pred = ResolvedPredicate.compare(op, lit, lit_len)
                out, stats = assert_same_scan(col, pred)
                want = naive_scan(codes, lens, op, lit, lit_len, col.max_len)
                assert out.to_indices().tolist() == want
                # depth bound: never deeper than the literal or the block
                assert stats.block_depth.max() <= min(lit_len, col.max_len)


def test_masked_scan_equals_post_intersection():
    rng = np.random.default_rng(23)
    n = 500
    lens = rng.integers(1, 4, size=n)
    lo = np.where(lens == 1, 1, 1 << (8 * (lens - 1)))
    codes = rng.integers(lo, 1 << (8 * lens.astype(np.int64))) | 1
    col = build_vbs(codes, lens)
    mask = BitVector.from_bools(rng.random(n) < 0.4)
    for lit, lit_len in literal_pool(codes, lens, rng)[:4]:
        for op in COMPARE_OPS:
            pred = ResolvedPredicate.compare(op, lit, lit_len)
            masked, _ = scan_vbs(col, pred, mask=mask)
            plain, _ = scan_vbs(col, pred)
            assert masked == (plain & mask)
            assert_same_scan(col, pred, mask=mask)


def test_between_pipelines_like_intersection():
    rng = np.random.default_rng(31)
    n = 800
    lens = rng.integers(1, 3, size=n)
    lo = np.where(lens == 1, 1, 1 << (8 * (lens - 1)))
    codes = rng.integers(lo, 1 << (8 * lens.astype(np.int64))) | 1
    col = build_vbs(codes, lens)
    for _ in range(10):
        a, b = sorted(rng.integers(0, n, size=2))
        lo_lit, lo_len = int(codes[a]), int(lens[a])
        hi_lit, hi_len = int(codes[b]), int(lens[b])
        if padded(lo_lit, lo_len, 2) > padded(hi_lit, hi_len, 2):
            (lo_lit, lo_len), (hi_lit, hi_len) = \
                (hi_lit, hi_len), (lo_lit, lo_len)
        pred = ResolvedPredicate.between(lo_lit, lo_len, hi_lit, hi_len)
        out, stats = scan_vbs(col, pred)
        ge, st1 = scan_vbs(col, ResolvedPredicate.compare(Op.GE, lo_lit, lo_len))
        le, st2 = scan_vbs(col, ResolvedPredicate.compare(Op.LE, hi_lit, hi_len))
        assert out == (ge & le)
        # the second leg only visits blocks the first leg left alive
        assert stats.blocks_skipped >= min(st1.blocks_skipped,
                                           st2.blocks_skipped)
        assert stats.total_bytes <= st1.total_bytes + st2.total_bytes
        assert_same_scan(col, pred)


def test_threaded_scan_identical_to_single():
    rng = np.random.default_rng(43)
    n = 4096
    lens = rng.integers(1, 4, size=n)
    lo = np.where(lens == 1, 1, 1 << (8 * (lens - 1)))
    codes = rng.integers(lo, 1 << (8 * lens.astype(np.int64))) | 1
    col = build_vbs(codes, lens)
    for lit, lit_len in literal_pool(codes, lens, rng)[:3]:
        for op in (Op.EQ, Op.GT, Op.LE):
            pred = ResolvedPredicate.compare(op, lit, lit_len)
            one, st1 = scan_vbs(col, pred, threads=1)
            four, st4 = scan_vbs(col, pred, threads=4)
            assert one == four
            assert st1.bytes_loaded.tolist() == st4.bytes_loaded.tolist()
            assert st1.block_depth.tolist() == st4.block_depth.tolist()
            assert st1.blocks_skipped == st4.blocks_skipped


@pytest.mark.parametrize("lane_count", [8, 16, 64])
def test_other_block_widths(lane_count):
    rng = np.random.default_rng(lane_count)
    n = 333
    lens = rng.integers(1, 4, size=n)
    lo = np.where(lens == 1, 1, 1 << (8 * (lens - 1)))
    codes = rng.integers(lo, 1 << (8 * lens.astype(np.int64))) | 1
    col = build_vbs(codes, lens, LaneConfig(lane_count))
    sel = BitVector.from_bools(rng.random(n) < 0.5)
    got, _ = lookup_vbs(col, sel)
    want = [padded(codes[i], lens[i], col.max_len) for i in sel.to_indices()]
    assert got.tolist() == want
    for lit, lit_len in literal_pool(codes, lens, rng)[:3]:
        for op in COMPARE_OPS:
            pred = ResolvedPredicate.compare(op, lit, lit_len)
            out, _ = scan_vbs(col, pred)
            assert out.to_indices().tolist() == naive_scan(
                codes, lens, op, lit, lit_len, col.max_len)


def test_depth_never_exceeds_longest_live_code():
    rng = np.random.default_rng(7)
    n = 2048
    lens = rng.integers(1, 5, size=n)
    lo = np.where(lens == 1, 1, 1 << (8 * (lens - 1)))
    codes = rng.integers(lo, 1 << (8 * lens.astype(np.int64))) | 1
    col = build_vbs(codes, lens)
    L = col.lanes.lane_count
    per_block_max = [int(lens[b * L:(b + 1) * L].max())
                     for b in range(col.n_blocks)]
    for lit, lit_len in literal_pool(codes, lens, rng):
        for op in COMPARE_OPS:
            _, stats = scan_vbs(col, ResolvedPredicate.compare(op, lit, lit_len))
            for b, d in enumerate(stats.block_depth.tolist()):
                assert d <= min(lit_len, per_block_max[b])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 300))
def test_scan_property_random_tables(seed, n):
    rng = np.random.default_rng(seed)
    lens = rng.integers(1, 4, size=n)
    lo = np.where(lens == 1, 1, 1 << (8 * (lens - 1)))
    codes = rng.integers(lo, 1 << (8 * lens.astype(np.int64))) | 1
    col = build_vbs(codes, lens)
    r = int(rng.integers(0, n))
    lit, lit_len = int(codes[r]), int(lens[r])
    op = COMPARE_OPS[seed % 6]
    pred = ResolvedPredicate.compare(op, lit, lit_len)
    out, _ = assert_same_scan(col, pred)
    assert out.to_indices().tolist() == naive_scan(
        codes, lens, op, lit, lit_len, col.max_len)
