"""Shared oracles and dataset builders for the test suite.

The naive evaluators here deliberately know nothing about codes, slices,
planes or masks: they filter decoded raw values with plain numpy, so any
agreement with a layout scan is evidence about the layout, not about
shared plumbing.
"""

from __future__ import annotations

import numpy as np

from bytestore.bitvector import ResultBitVector
from bytestore.datagen import ZipfSpec, gen_zipf
from bytestore.dictionary import (
    ColumnKind,
    Dictionary,
    build_frequency_table,
)
from bytestore.engine import LAYOUTS, build_layout, scan_layout
from bytestore.predicate import Op, Predicate

SCHEME_FOR = {
    "bitpacked": "fixed",
    "byteslice": "fixed",
    "vbp": "fixed",
    "pevbp": "prefix_free",
    "ppvbs": "prefix_preserving",
}

COMPARE_OPS = (Op.EQ, Op.NE, Op.LT, Op.LE, Op.GT, Op.GE)
ALL_OPS = COMPARE_OPS + (Op.BETWEEN,)


def naive_filter(values: np.ndarray, op: Op, lo, hi=None) -> np.ndarray:
    """Boolean row mask straight off the raw values."""
    v = np.asarray(values)
    if op is Op.EQ:
        return v == lo
    if op is Op.NE:
        return v != lo
    if op is Op.LT:
        return v < lo
    if op is Op.LE:
        return v <= lo
    if op is Op.GT:
        return v > lo
    if op is Op.GE:
        return v >= lo
    if op is Op.BETWEEN:
        return (v >= lo) & (v <= hi)
    raise ValueError(op)


def predicate_for(op: Op, lo, hi=None, column="c") -> Predicate:
    if op is Op.BETWEEN:
        return Predicate(column, op, lo, hi)
    return Predicate(column, op, lo)


def build_column(layout: str, values, kind=ColumnKind.NUMERIC, lanes=None):
    """Dictionary + physical column for one layout, like ingest does."""
    table = build_frequency_table(values, kind)
    dictionary = Dictionary.build(table, SCHEME_FOR[layout])
    ranks = dictionary.encode_rows(values)
    kwargs = {} if lanes is None else {"lanes": lanes}
    column = build_layout(layout, dictionary, ranks, **kwargs)
    return dictionary, column


def scan_with(layout, dictionary, column, pred: Predicate, mask=None, threads=1):
    """Resolve and run one predicate; returns (bitvector, stats-or-None)."""
    resolved = dictionary.encode_literal(pred)
    return scan_layout(layout, column, resolved, mask=mask, threads=threads)


def check_scan_matches_naive(layout, values, op, lo, hi=None, *,
                             kind=ColumnKind.NUMERIC, mask=None, threads=1,
                             prebuilt=None):
    """Assert one layout scan equals the naive filter; returns the scan."""
    dictionary, column = prebuilt or build_column(layout, values, kind)
    out, stats = scan_with(layout, dictionary, column,
                           predicate_for(op, lo, hi), mask=mask, threads=threads)
    want = naive_filter(values, op, lo, hi)
    if mask is not None:
        want = want & mask.to_bools()
    got = out.to_bools()
    assert np.array_equal(got, want), (
        f"{layout} {op} {lo} {hi}: {np.flatnonzero(got != want)[:10]}")
    return out, stats


def zipf_values(s: float, domain_bits: int, n_rows: int, seed: int) -> np.ndarray:
    return gen_zipf(ZipfSpec(s=s, domain_bits=domain_bits,
                             n_rows=n_rows, seed=seed))


def literal_pool(rng: np.random.Generator, values: np.ndarray, count: int):
    """Mix of present values and absent/out-of-range probes."""
    lo, hi = int(values.min()), int(values.max())
    pool = [lo, hi, lo - 1, hi + 1]
    pool += rng.choice(values, size=min(count, len(values))).tolist()
    pool += rng.integers(lo - 2, hi + 3, size=count).tolist()
    return [int(x) for x in pool]


def case_matrix(seed=0):
    """(values, layout) cases for the cross-layout acceptance sweeps."""
    rng = np.random.default_rng(seed)
    cases = []
    for d in (4, 8, 12, 16):
        for n in (10**3, 10**5):
            for s in (None, 0.5, 1.0, 1.5):  # None = uniform
                if s is None:
                    vals = rng.integers(0, 1 << d, size=n, dtype=np.int64)
                else:
                    vals = zipf_values(s, d, n, seed=rng.integers(2**31))
                cases.append((f"d={d} n={n} s={s}", vals))
    return cases


def all_layout_columns(values, kind=ColumnKind.NUMERIC):
    return {layout: build_column(layout, values, kind) for layout in LAYOUTS}
