"""Ingestion, layout selection, and query execution over a store.

Queries are disjunctions of conjunctions.  Within a conjunction each
predicate's scan receives the running result bitvector as its input
mask, so later scans skip blocks the earlier ones already ruled out;
disjunction arms are evaluated independently and OR-combined.  The final
bitvector drives lookup and decode on the projected columns.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from .advisor import ColumnAdvice, advise_column
from .bitpacked import build_bitpacked, lookup_bitpacked, scan_bitpacked
from .bitvector import ResultBitVector, bitvector_or
from .byteslice import (build_byteslice, byteslice_size_report,
                        lookup_byteslice, scan_byteslice)
from .bitpacked import bitpacked_size_report
from .datagen import PRNG_NAME
from .dictionary import ColumnKind, Dictionary, build_frequency_table
from .predicate import DEFAULT_LANES, LaneConfig, Predicate
from .store import FORMAT_VERSION, Store, StoredColumn
from .vbp import build_vbp, lookup_vbp, pad_codes, scan_vbp, vbp_size_report
from .vbs import build_vbs, lookup_vbs, scan_vbs, vbs_size_report

__all__ = ["ColumnSpec", "Schema", "Query", "QueryResult", "IngestReport",
           "DataError", "LAYOUTS", "ingest", "execute", "read_csv_columns",
           "size_report"]

LAYOUTS = ("bitpacked", "byteslice", "vbp", "pevbp", "ppvbs")

_SCHEME_FOR = {
    "bitpacked": "fixed",
    "byteslice": "fixed",
    "vbp": "fixed",
    "pevbp": "prefix_free",
    "ppvbs": "prefix_preserving",
}

_KIND_NAMES = {
    "numeric": ColumnKind.NUMERIC,
    "categorical": ColumnKind.CATEGORICAL,
    "ordered_string": ColumnKind.ORDERED_STRING,
    # schema-config alias: string columns that see range predicates
    "semi_categorical_string": ColumnKind.ORDERED_STRING,
}


class DataError(Exception):
    """Input data problem: malformed CSV, NULLs, bad literals."""


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: ColumnKind
    layout: str | None = None  # forces the layout, bypassing the advisor

    def __post_init__(self):
        if self.layout is not None and self.layout not in LAYOUTS:
            raise ValueError(f"unknown layout {self.layout!r}")


@dataclass
class Schema:
    columns: list

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ValueError("duplicate column names in schema")

    @staticmethod
    def parse_kind(text: str) -> ColumnKind:
        try:
            return _KIND_NAMES[text]
        except KeyError:
            raise ValueError(f"unknown column kind {text!r}") from None


@dataclass
class Query:
    groups: list                 # list of conjunctions (lists of Predicate)
    projection: list

    @classmethod
    def conjunction(cls, predicates, projection) -> "Query":
        return cls([list(predicates)], list(projection))


@dataclass
class IngestReport:
    rows: list = field(default_factory=list)  # per-column timing dicts
    advice: dict = field(default_factory=dict)  # name -> ColumnAdvice


@dataclass
class QueryResult:
    n_selected: int
    columns: dict
    timings: list
    selection: ResultBitVector


# ---------------------------------------------------------------------------
# CSV input


def read_csv_columns(path, schema: Schema) -> dict:
    """Parse the schema's columns out of a header-bearing CSV file.

    Numeric cells must be integers; any empty cell is treated as a NULL
    and rejected.  Errors carry 1-based line numbers and column names.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty CSV, header row required") from None
        positions = {}
        for spec in schema.columns:
            if spec.name not in header:
                raise DataError(f"{path}: column {spec.name!r} missing from header")
            positions[spec.name] = header.index(spec.name)
        raw = {spec.name: [] for spec in schema.columns}
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} cells, "
                                f"got {len(row)}")
            for spec in schema.columns:
                cell = row[positions[spec.name]]
                if cell == "":
                    raise DataError(f"{path}:{lineno}: NULL in column "
                                    f"{spec.name!r}")
                raw[spec.name].append(cell)
    if not raw or not next(iter(raw.values())):
        raise DataError(f"{path}: no data rows")
    out = {}
    for spec in schema.columns:
        cells = raw[spec.name]
        if spec.kind is ColumnKind.NUMERIC:
            try:
                out[spec.name] = np.array([int(c) for c in cells], dtype=np.int64)
            except ValueError:
                bad = next(i for i, c in enumerate(cells) if not _is_int(c))
                raise DataError(f"{path}:{bad + 2}: non-integer value "
                                f"{cells[bad]!r} in numeric column "
                                f"{spec.name!r}") from None
        else:
            out[spec.name] = np.array(cells, dtype=object)
    return out


def _is_int(text: str) -> bool:
    try:
        int(text)
        return True
    except ValueError:
        return False


# ---------------------------------------------------------------------------
# layout build / scan / lookup dispatch


def build_layout(layout: str, dictionary: Dictionary, ranks: np.ndarray,
                 lanes: LaneConfig = DEFAULT_LANES):
    a = dictionary.assignment
    if layout == "ppvbs":
        codes, lens = dictionary.row_codes(ranks)
        return build_vbs(codes, lens, lanes)
    if layout == "byteslice":
        return build_byteslice(ranks, a.width_bits, lanes)
    if layout == "bitpacked":
        return build_bitpacked(ranks, a.width_bits)
    if layout == "vbp":
        return build_vbp(ranks, a.width_bits, "plain")
    if layout == "pevbp":
        codes, lens = dictionary.row_codes(ranks)
        return build_vbp(pad_codes(codes, lens, a.width_bits), a.width_bits,
                         "padded_encoding")
    raise ValueError(f"unknown layout {layout!r}")


def scan_layout(layout: str, column, pred, mask=None, threads: int = 1):
    """Uniform scan entry: returns (ResultBitVector, ScanStats-or-None)."""
    if layout == "bitpacked":
        return scan_bitpacked(column, pred, mask, threads), None
    if layout == "byteslice":
        return scan_byteslice(column, pred, mask, threads)
    if layout == "ppvbs":
        return scan_vbs(column, pred, mask, threads)
    if layout in ("vbp", "pevbp"):
        return scan_vbp(column, pred, mask, threads)
    raise ValueError(f"unknown layout {layout!r}")


def lookup_decode(stored: StoredColumn, selection: ResultBitVector) -> np.ndarray:
    """Selected rows of one column, decoded back to values."""
    layout, col, d = stored.layout, stored.column, stored.dictionary
    if layout == "ppvbs":
        padded, _ = lookup_vbs(col, selection)
        return d.decode_padded(padded)
    if layout == "byteslice":
        ranks, _ = lookup_byteslice(col, selection)
        return d.decode_ranks(ranks)
    if layout == "bitpacked":
        return d.decode_ranks(lookup_bitpacked(col, selection))
    if layout == "vbp":
        ranks, _ = lookup_vbp(col, selection)
        return d.decode_ranks(ranks)
    if layout == "pevbp":
        padded, _ = lookup_vbp(col, selection)
        return d.decode_padded(padded)
    raise ValueError(f"unknown layout {layout!r}")


def size_report(stored: StoredColumn) -> dict:
    layout, col = stored.layout, stored.column
    if layout == "ppvbs":
        return vbs_size_report(col)
    if layout == "byteslice":
        return byteslice_size_report(col)
    if layout == "bitpacked":
        return bitpacked_size_report(col)
    return vbp_size_report(col)


# ---------------------------------------------------------------------------
# ingest


def ingest(csv_path, schema: Schema, policy: str = "advisor", *,
           advise_cost="wall", advise_count: int = 100,
           subsample: int | None = None, lanes: LaneConfig = DEFAULT_LANES,
           threads: int = 1, extra_manifest: dict | None = None
           ) -> tuple[Store, IngestReport]:
    """Encode every schema column, choose layouts, assemble a store."""
    if policy not in ("advisor", "forced"):
        raise ValueError(f"unknown layout policy {policy!r}")
    data = read_csv_columns(csv_path, schema)
    n_rows = len(next(iter(data.values())))
    report = IngestReport()
    columns = {}
    entries = []
    for spec in schema.columns:
        values = data[spec.name]
        advise_s = 0.0
        advice = None
        layout = spec.layout
        if layout is None:
            if policy == "forced":
                raise DataError(f"column {spec.name!r}: forced policy needs "
                                "a layout in the schema")
            t0 = time.perf_counter()
            advice = advise_column(spec.name, values, spec.kind,
                                   count=advise_count, cost=advise_cost,
                                   subsample=subsample, lanes=lanes,
                                   threads=threads)
            advise_s = time.perf_counter() - t0
            layout = advice.chosen
            report.advice[spec.name] = advice
        t0 = time.perf_counter()
        table = build_frequency_table(values, spec.kind)
        try:
            dictionary = Dictionary.build(table, _SCHEME_FOR[layout])
        except ValueError as exc:
            raise DataError(f"column {spec.name!r}: {exc}") from None
        ranks = dictionary.encode_rows(values)
        column = build_layout(layout, dictionary, ranks, lanes)
        encode_s = time.perf_counter() - t0
        columns[spec.name] = StoredColumn(spec.name, spec.kind,
                                          _SCHEME_FOR[layout], layout,
                                          dictionary, column)
        entry = {"name": spec.name, "kind": spec.kind.value,
                 "scheme": _SCHEME_FOR[layout], "layout": layout,
                 "n_distinct": table.n}
        if advice is not None and not advice.degenerate:
            entry["advice"] = {"chosen": advice.chosen,
                               "auc_byteslice": advice.auc_byteslice,
                               "auc_ppvbs": advice.auc_ppvbs}
        entries.append(entry)
        report.rows.append({"column": spec.name, "layout": layout,
                            "n_distinct": table.n, "encode_s": encode_s,
                            "advise_s": advise_s})
    manifest = {"format_version": FORMAT_VERSION, "n_rows": n_rows,
                "prng": PRNG_NAME, "lane_count": lanes.lane_count,
                "columns": entries}
    if extra_manifest:
        manifest.update(extra_manifest)
    return Store(manifest, columns), report


# ---------------------------------------------------------------------------
# execute


def _resolve(stored: StoredColumn, pred: Predicate):
    try:
        return stored.dictionary.encode_literal(pred)
    except (TypeError, ValueError) as exc:
        raise DataError(f"predicate on {pred.column!r}: {exc}") from None


def execute(store: Store, query: Query, threads: int = 1) -> QueryResult:
    for name in query.projection:
        if name not in store.columns:
            raise DataError(f"unknown projection column {name!r}")
    for group in query.groups:
        for pred in group:
            if pred.column not in store.columns:
                raise DataError(f"unknown predicate column {pred.column!r}")

    timings = []
    arm_results = []
    for group in query.groups:
        running = None
        for pred in group:
            stored = store.columns[pred.column]
            resolved = _resolve(stored, pred)
            t0 = time.perf_counter()
            running, _ = scan_layout(stored.layout, stored.column, resolved,
                                     running, threads)
            timings.append({"column": pred.column, "phase": "scan",
                            "op": pred.op.name, "seconds":
                            time.perf_counter() - t0})
        if running is None:  # empty conjunction selects everything
            running = ResultBitVector.ones(store.n_rows)
        arm_results.append(running)
    selection = arm_results[0]
    for extra in arm_results[1:]:
        selection = bitvector_or(selection, extra)

    n_selected = selection.count()
    out_columns = {}
    for name in query.projection:
        stored = store.columns[name]
        if n_selected == 0:
            out_columns[name] = stored.dictionary.table.values[:0]
            timings.append({"column": name, "phase": "lookup", "op": "",
                            "seconds": 0.0})
            continue
        t0 = time.perf_counter()
        out_columns[name] = lookup_decode(stored, selection)
        timings.append({"column": name, "phase": "lookup", "op": "",
                        "seconds": time.perf_counter() - t0})
    return QueryResult(n_selected, out_columns, timings, selection)
