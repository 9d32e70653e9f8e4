"""Layout advisor: literal selection, curve area, and the decision rule."""

import numpy as np
import pytest

from bytestore.advisor import (
    ColumnAdvice,
    ProfilePoint,
    advise,
    advise_column,
    auc,
    select_literals,
)
from bytestore.datagen import ZipfSpec, gen_zipf
from bytestore.dictionary import ColumnKind
from bytestore.predicate import Op


def test_quantile_literals_cover_selectivities():
    rng = np.random.default_rng(1)
    values = rng.integers(0, 10_000, size=20_000)
    op, lits = select_literals(values, ColumnKind.NUMERIC, count=100)
    assert op is Op.LT
    assert len(lits) == 100
    # literal at the median should select about half the rows
    mid = lits[49]
    assert (values < mid).mean() == pytest.approx(0.5, abs=0.02)
    # the last literal reaches (almost) everything
    assert (values < lits[-1]).mean() > 0.99


def test_categorical_literals_at_frequency_ranks():
    values = (["hot"] * 500 + ["warm"] * 100 + ["mild"] * 20
              + ["cold"] * 4 + ["ice"])
    op, lits = select_literals(values, ColumnKind.CATEGORICAL, count=100)
    assert op is Op.EQ
    assert lits == ["hot", "warm", "mild", "cold", "ice"]  # all, most frequent first
    op, lits = select_literals(values, ColumnKind.CATEGORICAL, count=3)
    assert len(lits) == 3
    assert "hot" in lits and "ice" in lits  # endpoints always kept


def test_auc_rules():
    assert auc([ProfilePoint(0, 3.0), ProfilePoint(1, 3.0)]) == pytest.approx(3.0)
    assert auc([ProfilePoint(0, 0.0), ProfilePoint(1, 2.0)]) == pytest.approx(1.0)
    base = [ProfilePoint(0.2, 1.0), ProfilePoint(0.7, 2.0), ProfilePoint(1, 0.5)]
    doubled = [ProfilePoint(p.selectivity, 2 * p.time) for p in base]
    assert auc(doubled) == pytest.approx(2 * auc(base))
    shuffled = [base[2], base[0], base[1]]
    assert auc(shuffled) == pytest.approx(auc(base))
    with pytest.raises(ValueError):
        auc([ProfilePoint(0, 1.0)])


def test_tie_goes_to_byteslice():
    values = np.arange(1000) % 7
    adv = advise_column("c", values, ColumnKind.NUMERIC,
                        count=5, cost=lambda run: 1.0)
    assert adv.chosen == "byteslice"
    assert adv.auc_byteslice == adv.auc_ppvbs


def test_degenerate_column_short_circuits():
    adv = advise_column("c", np.zeros(100, dtype=np.int64), ColumnKind.NUMERIC)
    assert adv.degenerate
    assert adv.chosen == "byteslice"
    assert adv.auc_byteslice is None


def test_byte_cost_prefers_dense_slices_on_uniform():
    values = gen_zipf(ZipfSpec(0.0, 12, 100_000, seed=2))
    adv = advise_column("u", values, ColumnKind.NUMERIC, count=20, cost="bytes")
    assert adv.chosen == "byteslice"
    assert adv.auc_byteslice < adv.auc_ppvbs
    assert len(adv.points_byteslice) == 20


def test_byte_cost_prefers_variable_slices_on_skew():
    values = gen_zipf(ZipfSpec(1.5, 12, 100_000, seed=2))
    adv = advise_column("z", values, ColumnKind.NUMERIC, count=20, cost="bytes")
    assert adv.chosen == "ppvbs"
    assert adv.auc_ppvbs < adv.auc_byteslice


def test_byte_cost_is_deterministic():
    values = gen_zipf(ZipfSpec(1.2, 10, 30_000, seed=9))
    a = advise_column("c", values, ColumnKind.NUMERIC, count=10, cost="bytes")
    b = advise_column("c", values, ColumnKind.NUMERIC, count=10, cost="bytes")
    assert a.auc_byteslice == b.auc_byteslice
    assert a.auc_ppvbs == b.auc_ppvbs
    assert [(p.selectivity, p.time) for p in a.points_ppvbs] == \
        [(p.selectivity, p.time) for p in b.points_ppvbs]


def test_advise_handles_multiple_columns():
    cols = {
        "skewed": (gen_zipf(ZipfSpec(1.5, 10, 20_000, seed=1)),
                   ColumnKind.NUMERIC),
        "flat": (gen_zipf(ZipfSpec(0.0, 10, 20_000, seed=1)),
                 ColumnKind.NUMERIC),
        "const": (np.ones(20_000, dtype=np.int64), ColumnKind.NUMERIC),
    }
    out = advise(cols, count=10, cost="bytes")
    assert [a.column for a in out] == ["skewed", "flat", "const"]
    assert out[0].chosen == "ppvbs"
    assert out[1].chosen == "byteslice"
    assert out[2].degenerate


def test_subsample_cap():
    values = gen_zipf(ZipfSpec(1.0, 8, 50_000, seed=4))
    adv = advise_column("c", values, ColumnKind.NUMERIC, count=5,
                        cost="bytes", subsample=2000)
    assert isinstance(adv, ColumnAdvice)
    assert not adv.degenerate
