"""Micro-benchmark sweeps over synthetic Zipf columns.

For each skew value a fresh column is generated, encoded once per
scheme, and laid out in every requested physical form; scans and lookups
are then timed as medians of repeated runs and normalized to
nanoseconds per code, alongside the stored bits per code.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .datagen import ZipfSpec, gen_zipf
from .dictionary import ColumnKind, Dictionary, build_frequency_table
from .engine import LAYOUTS, _SCHEME_FOR, build_layout, scan_layout, size_report
from .predicate import DEFAULT_LANES, LaneConfig, Op, Predicate
from .store import StoredColumn

__all__ = ["SweepSpec", "run_sweep", "sweep_to_csv", "BENCH_FIELDS"]

BENCH_FIELDS = ["layout", "s", "d", "n_rows", "selectivity",
                "scan_ns_per_code", "lookup_ns_per_code", "bits_per_code"]


@dataclass
class SweepSpec:
    s_values: list
    domain_bits: int = 12
    n_rows: int = 10**6
    seed: int = 42
    layouts: tuple = LAYOUTS
    target_selectivity: float = 0.1
    reps: int = 5
    threads: int = 1
    lanes: LaneConfig = field(default_factory=lambda: DEFAULT_LANES)


def _median_time(run, reps: int) -> float:
    run()  # warm-up
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        run()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def _lookup_fn(stored: StoredColumn, selection):
    from .engine import lookup_decode  # local import avoids cycle at module load

    def run():
        return lookup_decode(stored, selection)

    return run


def run_sweep(spec: SweepSpec, progress=None) -> list[dict]:
    rows = []
    for i, s in enumerate(spec.s_values):
        zspec = ZipfSpec(float(s), spec.domain_bits, spec.n_rows,
                         seed=spec.seed + i)
        values = gen_zipf(zspec)
        table = build_frequency_table(values, ColumnKind.NUMERIC)
        # literal whose LT scan is close to the target selectivity
        order = np.sort(values)
        literal = int(order[min(len(order) - 1,
                                int(spec.target_selectivity * len(order)))])
        pred = Predicate("v", Op.LT, literal)

        dicts = {}
        for layout in spec.layouts:
            scheme = _SCHEME_FOR[layout]
            if scheme not in dicts:
                dicts[scheme] = Dictionary.build(table, scheme)
        ranks = next(iter(dicts.values())).encode_rows(values)

        for layout in spec.layouts:
            d = dicts[_SCHEME_FOR[layout]]
            column = build_layout(layout, d, ranks, spec.lanes)
            resolved = d.encode_literal(pred)

            def scan_run():
                return scan_layout(layout, column, resolved, None, spec.threads)

            scan_t = _median_time(scan_run, spec.reps)
            selection, _ = scan_run()
            stored = StoredColumn("v", ColumnKind.NUMERIC, _SCHEME_FOR[layout],
                                  layout, d, column)
            n_sel = selection.count()
            lookup_t = (_median_time(_lookup_fn(stored, selection), spec.reps)
                        if n_sel else 0.0)
            rows.append({
                "layout": layout,
                "s": float(s),
                "d": spec.domain_bits,
                "n_rows": spec.n_rows,
                "selectivity": n_sel / spec.n_rows,
                "scan_ns_per_code": scan_t / spec.n_rows * 1e9,
                "lookup_ns_per_code": (lookup_t / n_sel * 1e9) if n_sel else 0.0,
                "bits_per_code": size_report(stored)["avg_bits_per_code"],
            })
            if progress is not None:
                progress(rows[-1])
    return rows


def sweep_to_csv(rows: list, path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=BENCH_FIELDS)
        writer.writeheader()
        writer.writerows(rows)
