"""Command-line surface: ingest, advise, query, bench, gen, inspect.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .advisor import advise_column
from .bench import BENCH_FIELDS, SweepSpec, run_sweep, sweep_to_csv
from .datagen import ZipfSpec, gen_zipf
from .dictionary import ColumnKind
from .engine import (ColumnSpec, DataError, LAYOUTS, Query, Schema, execute,
                     ingest, read_csv_columns, size_report)
from .predicate import Op, Predicate
from .store import read_store, write_store

__all__ = ["main", "parse_where", "parse_column_spec"]


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract here is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def parse_column_spec(text: str) -> ColumnSpec:
    """NAME:KIND[:LAYOUT] -> ColumnSpec."""
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ValueError(f"bad column spec {text!r}, want name:kind[:layout]")
    name, kind = parts[0], Schema.parse_kind(parts[1])
    layout = parts[2] if len(parts) == 3 else None
    return ColumnSpec(name, kind, layout)


def _literal(token: str):
    if len(token) >= 2 and token[0] == token[-1] and token[0] in "'\"":
        return token[1:-1]
    try:
        return int(token)
    except ValueError:
        return token


def parse_where(text: str) -> list:
    """`col OP literal [AND col OP literal ...]` -> predicate list.

    BETWEEN takes two literals: `col between lo hi`.
    """
    tokens = text.split()
    clauses = []
    current = []
    for tok in tokens:
        if tok.upper() == "AND":
            clauses.append(current)
            current = []
        else:
            current.append(tok)
    clauses.append(current)
    preds = []
    for clause in clauses:
        if len(clause) == 3:
            col, op_text, lit = clause
            preds.append(Predicate(col, Op.parse(op_text), _literal(lit)))
        elif len(clause) == 4 and clause[1].upper() == "BETWEEN":
            col, _, lo, hi = clause
            preds.append(Predicate(col, Op.BETWEEN, _literal(lo),
                                   _literal(hi)))
        else:
            raise ValueError(f"cannot parse predicate {' '.join(clause)!r}")
    return preds


def _schema_from_args(args) -> Schema:
    return Schema([parse_column_spec(c) for c in args.column])


def _write_advice_report(advices, out_dir):
    import os

    from .plots import plot_advice

    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "advice.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["column", "chosen", "auc_byteslice", "auc_ppvbs",
                         "degenerate"])
        for a in advices:
            writer.writerow([a.column, a.chosen, a.auc_byteslice,
                             a.auc_ppvbs, int(a.degenerate)])
    figures = [plot_advice(a, out_dir) for a in advices if not a.degenerate]
    return path, figures


# ---------------------------------------------------------------------------
# subcommand bodies


def _cmd_gen(args) -> int:
    spec = ZipfSpec(args.s, args.domain_bits, args.n, seed=args.seed)
    values = gen_zipf(spec)
    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    try:
        writer = csv.writer(out)
        writer.writerow([args.name])
        for v in values.tolist():
            writer.writerow([v])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _cmd_ingest(args) -> int:
    schema = _schema_from_args(args)
    store, report = ingest(args.csv, schema, args.policy,
                           advise_cost=args.advise_cost,
                           advise_count=args.advise_count,
                           subsample=args.subsample, threads=args.threads)
    write_store(args.out, store)
    writer = csv.writer(sys.stdout)
    writer.writerow(["column", "layout", "n_distinct", "encode_s", "advise_s"])
    for row in report.rows:
        writer.writerow([row["column"], row["layout"], row["n_distinct"],
                         f"{row['encode_s']:.6f}", f"{row['advise_s']:.6f}"])
    if args.report_dir and report.advice:
        _write_advice_report(report.advice.values(), args.report_dir)
    return 0


def _cmd_advise(args) -> int:
    schema = _schema_from_args(args)
    data = read_csv_columns(args.csv, schema)
    advices = [advise_column(spec.name, data[spec.name], spec.kind,
                             count=args.count, cost=args.cost,
                             subsample=args.subsample, threads=args.threads)
               for spec in schema.columns]
    writer = csv.writer(sys.stdout)
    writer.writerow(["column", "chosen", "auc_byteslice", "auc_ppvbs",
                     "degenerate"])
    for a in advices:
        writer.writerow([a.column, a.chosen, a.auc_byteslice, a.auc_ppvbs,
                         int(a.degenerate)])
    if args.out_dir:
        _write_advice_report(advices, args.out_dir)
    return 0


def _cmd_query(args) -> int:
    store = read_store(args.store)
    groups = [parse_where(w) for w in args.where] if args.where else [[]]
    projection = [c for c in args.project.split(",") if c] if args.project else []
    result = execute(store, Query(groups, projection), threads=args.threads)
    writer = csv.writer(sys.stdout)
    if projection:
        writer.writerow(projection)
        cols = [result.columns[name] for name in projection]
        for row in zip(*(c.tolist() for c in cols)):
            writer.writerow(row)
    else:
        writer.writerow(["n_selected"])
        writer.writerow([result.n_selected])
    print(f"# n_selected={result.n_selected}", file=sys.stderr)
    for t in result.timings:
        print(f"# {t['phase']} {t['column']} {t['op']} {t['seconds']:.6f}s",
              file=sys.stderr)
    return 0


def _cmd_bench(args) -> int:
    import os

    s_values = [float(x) for x in args.s.split(",")]
    layouts = tuple(args.layouts.split(",")) if args.layouts else LAYOUTS
    for layout in layouts:
        if layout not in LAYOUTS:
            raise DataError(f"unknown layout {layout!r}")
    spec = SweepSpec(s_values, domain_bits=args.domain_bits, n_rows=args.n,
                     seed=args.seed, layouts=layouts,
                     target_selectivity=args.selectivity, reps=args.reps,
                     threads=args.threads)

    def progress(row):
        print(f"# s={row['s']:.2f} {row['layout']}: "
              f"scan {row['scan_ns_per_code']:.2f} ns/code", file=sys.stderr)

    rows = run_sweep(spec, progress=progress if args.verbose else None)
    writer = csv.DictWriter(sys.stdout, fieldnames=BENCH_FIELDS)
    writer.writeheader()
    writer.writerows(rows)
    if args.out_dir:
        from .plots import plot_sweep

        os.makedirs(args.out_dir, exist_ok=True)
        sweep_to_csv(rows, os.path.join(args.out_dir, "bench.csv"))
        plot_sweep(rows, args.out_dir)
    return 0


def _cmd_inspect(args) -> int:
    store = read_store(args.store)
    print(json.dumps(store.manifest, indent=2, sort_keys=True))
    writer = csv.writer(sys.stdout)
    writer.writerow(["column", "layout", "total_bytes", "bits_per_code"])
    for name, stored in store.columns.items():
        rep = size_report(stored)
        writer.writerow([name, stored.layout, rep["total_bytes"],
                         f"{rep['avg_bits_per_code']:.3f}"])
    return 0


# ---------------------------------------------------------------------------
# parser wiring


def _build_parser() -> _Parser:
    p = _Parser(prog="bytestore",
                description="columnar scan engine with byte-sliced layouts")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="emit a synthetic Zipf column as CSV")
    g.add_argument("out", help="output CSV path, or - for stdout")
    g.add_argument("--n", type=int, default=10**6)
    g.add_argument("--domain-bits", type=int, default=12)
    g.add_argument("--s", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--name", default="v", help="CSV column name")
    g.set_defaults(fn=_cmd_gen)

    i = sub.add_parser("ingest", help="encode a CSV into a store file")
    i.add_argument("csv")
    i.add_argument("--out", required=True, help="store file path")
    i.add_argument("--column", action="append", required=True,
                   metavar="NAME:KIND[:LAYOUT]",
                   help="column spec; kinds: numeric, categorical, "
                        "semi_categorical_string")
    i.add_argument("--policy", choices=["advisor", "forced"], default="advisor")
    i.add_argument("--advise-cost", choices=["wall", "bytes"], default="wall")
    i.add_argument("--advise-count", type=int, default=100)
    i.add_argument("--subsample", type=int, default=None)
    i.add_argument("--threads", type=int, default=1)
    i.add_argument("--report-dir", default=None,
                   help="write advice CSV and profile figures here")
    i.set_defaults(fn=_cmd_ingest)

    a = sub.add_parser("advise", help="profile layouts for CSV columns")
    a.add_argument("csv")
    a.add_argument("--column", action="append", required=True,
                   metavar="NAME:KIND")
    a.add_argument("--cost", choices=["wall", "bytes"], default="wall")
    a.add_argument("--count", type=int, default=100)
    a.add_argument("--subsample", type=int, default=None)
    a.add_argument("--threads", type=int, default=1)
    a.add_argument("--out-dir", default=None,
                   help="write advice.csv and profile figures here")
    a.set_defaults(fn=_cmd_advise)

    q = sub.add_parser("query", help="run predicates against a store")
    q.add_argument("store")
    q.add_argument("--where", action="append", default=[],
                   metavar="'col OP literal [AND ...]'",
                   help="conjunction; repeat the flag to OR several")
    q.add_argument("--project", default="", help="comma-separated columns")
    q.add_argument("--threads", type=int, default=1)
    q.set_defaults(fn=_cmd_query)

    b = sub.add_parser("bench", help="skew sweep benchmark")
    b.add_argument("--s", default="0,0.5,1.0,1.5,2.0",
                   help="comma-separated skew values")
    b.add_argument("--domain-bits", type=int, default=12)
    b.add_argument("--n", type=int, default=10**6)
    b.add_argument("--seed", type=int, default=42)
    b.add_argument("--layouts", default="",
                   help=f"comma-separated subset of {','.join(LAYOUTS)}")
    b.add_argument("--selectivity", type=float, default=0.1)
    b.add_argument("--reps", type=int, default=5)
    b.add_argument("--threads", type=int, default=1)
    b.add_argument("--out-dir", default=None,
                   help="write bench.csv and sweep figures here")
    b.add_argument("--verbose", action="store_true")
    b.set_defaults(fn=_cmd_bench)

    n = sub.add_parser("inspect", help="dump manifest and size report")
    n.add_argument("store")
    n.set_defaults(fn=_cmd_inspect)
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except DataError as exc:
        print(f"bytestore: {exc}", file=sys.stderr)
        return 2
    except (ValueError, LookupError, OSError) as exc:
        print(f"bytestore: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
