"""Experiment-driven column layout advisor.

Each column is encoded both ways (fixed codes in byte slices, and the
prefix-preserving variable byte slice form), scanned with literals that
span the feasible selectivity spectrum, and the layout with the smaller
area under the (selectivity, cost) curve wins.  Ties go to byte slices.

The cost source is pluggable: wall-clock timing for real advice, counted
byte loads for a deterministic variant, or any callable for tests.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .byteslice import build_byteslice, scan_byteslice
from .dictionary import ColumnKind, Dictionary, build_frequency_table
from .predicate import DEFAULT_LANES, LaneConfig, Op, Predicate
from .vbs import build_vbs, scan_vbs

__all__ = ["ProfilePoint", "ColumnAdvice", "select_literals", "auc",
           "advise_column", "advise"]

PROFILE_REPS = 5


@dataclass(frozen=True)
class ProfilePoint:
    selectivity: float
    time: float


@dataclass
class ColumnAdvice:
    column: str
    chosen: str                         # "byteslice" | "ppvbs"
    auc_byteslice: float | None = None
    auc_ppvbs: float | None = None
    points_byteslice: list = field(default_factory=list)
    points_ppvbs: list = field(default_factory=list)
    degenerate: bool = False


def select_literals(values, kind: ColumnKind, count: int = 100):
    """Literals spanning the selectivity spectrum, and the probe operator.

    Ordered columns get nearest-rank quantile literals probed with LT;
    categorical columns get values at evenly spaced frequency ranks
    probed with EQ (all values when fewer than `count` are distinct).
    """
    values = np.asarray(values)
    if kind.ordered:
        order = np.sort(values)
        n = len(order)
        ranks = np.minimum(n - 1, (np.arange(1, count + 1) * n) // count)
        literals = order[ranks]
        return Op.LT, list(literals)
    uniq, counts = np.unique(values, return_counts=True)
    by_freq = uniq[np.lexsort((uniq, -counts))]
    if len(by_freq) <= count:
        return Op.EQ, list(by_freq)
    idx = np.unique(np.linspace(0, len(by_freq) - 1, count).round().astype(int))
    return Op.EQ, list(by_freq[idx])


def auc(points) -> float:
    """Trapezoidal area under time-over-selectivity, sorted by selectivity."""
    if len(points) < 2:
        raise ValueError("need at least 2 profile points")
    s = np.array([p.selectivity for p in points], dtype=np.float64)
    y = np.array([p.time for p in points], dtype=np.float64)
    order = np.argsort(s, kind="stable")
    return float(np.trapezoid(y[order], s[order]))


def _measure_wall(run, reps: int = PROFILE_REPS) -> float:
    run()  # warm-up
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        run()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def _measure_bytes(run) -> float:
    _, stats = run()
    return float(stats.total_bytes)


def _profile(scan, column, dictionary: Dictionary, probe_op: Op, literals,
             cost, threads: int) -> list[ProfilePoint]:
    n = column.n_rows
    points = []
    for lit in literals:
        pred = dictionary.encode_literal(Predicate("", probe_op, _pyval(lit)))

        def run():
            return scan(column, pred, None, threads)

        if cost == "wall":
            y = _measure_wall(run)
        elif cost == "bytes":
            y = _measure_bytes(run)
        else:
            y = float(cost(run))
        result, _ = run()
        points.append(ProfilePoint(result.count() / n, y))
    return points


def _pyval(lit):
    return lit.item() if isinstance(lit, np.generic) else lit


def advise_column(name: str, values, kind: ColumnKind, *,
                  count: int = 100, cost="wall",
                  subsample: int | None = None,
                  lanes: LaneConfig = DEFAULT_LANES,
                  threads: int = 1) -> ColumnAdvice:
    """Profile both encodings of one column and pick the smaller AUC."""
    values = np.asarray(values)
    if subsample is not None and len(values) > subsample:
        stride = -(-len(values) // subsample)
        values = values[::stride]

    table = build_frequency_table(values, kind)
    if table.n < 2:
        return ColumnAdvice(name, "byteslice", degenerate=True)

    probe_op, literals = select_literals(values, kind, count)
    dict_fixed = Dictionary.build(table, scheme="fixed")
    dict_ppe = Dictionary.build(table, scheme="prefix_preserving")
    ranks = dict_fixed.encode_rows(values)

    col_bs = build_byteslice(ranks, dict_fixed.assignment.width_bits, lanes)
    codes, lens = dict_ppe.row_codes(ranks)
    col_vbs = build_vbs(codes, lens, lanes)

    pts_bs = _profile(scan_byteslice, col_bs, dict_fixed, probe_op, literals,
                      cost, threads)
    pts_vbs = _profile(scan_vbs, col_vbs, dict_ppe, probe_op, literals,
                       cost, threads)
    y = auc(pts_bs)
    z = auc(pts_vbs)
    chosen = "byteslice" if y <= z else "ppvbs"
    return ColumnAdvice(name, chosen, y, z, pts_bs, pts_vbs)


def advise(columns: dict, **kwargs) -> list[ColumnAdvice]:
    """Advise every column in {name: (values, kind)} order-preservingly."""
    return [advise_column(name, vals, kind, **kwargs)
            for name, (vals, kind) in columns.items()]
