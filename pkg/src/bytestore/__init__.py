"""ByteStore: a main-memory columnar engine with byte-sliced layouts.

Columns are dictionary-encoded and stored in one of several physical
layouts (tightly bit-packed, fixed byte slices, vertical bit planes, or
prefix-preserving variable byte slices); predicate scans early-stop at
byte or bit granularity, and an experiment-driven advisor picks the
layout per column.
"""

from .advisor import ColumnAdvice, ProfilePoint, advise, advise_column, auc
from .bitpacked import BitPackedColumn, build_bitpacked, lookup_bitpacked, scan_bitpacked
from .bitvector import ResultBitVector, bitvector_and, bitvector_or
from .byteslice import ByteSliceColumn, build_byteslice, lookup_byteslice, scan_byteslice
from .datagen import ZipfSpec, gen_zipf
from .dictionary import (
    CodeAssignment,
    ColumnKind,
    Dictionary,
    FrequencyTable,
    build_frequency_table,
    compare_codes,
)
from .engine import (
    ColumnSpec,
    DataError,
    LAYOUTS,
    Query,
    QueryResult,
    Schema,
    execute,
    ingest,
)
from .predicate import LaneConfig, Op, Predicate, ResolvedPredicate
from .stats import LookupStats, ScanStats
from .store import Store, StoredColumn, read_store, write_store
from .vbp import VbpColumn, build_vbp, lookup_vbp, scan_vbp
from .vbs import VbsColumn, build_vbs, lookup_vbs, scan_vbs, vbs_size_report

__version__ = "0.1.0"

__all__ = [
    "BitPackedColumn", "ByteSliceColumn", "CodeAssignment", "ColumnAdvice",
    "ColumnKind", "ColumnSpec", "DataError", "Dictionary", "FrequencyTable",
    "LAYOUTS", "LaneConfig", "LookupStats", "Op", "Predicate", "ProfilePoint",
    "Query", "QueryResult", "ResolvedPredicate", "ResultBitVector",
    "ScanStats", "Schema", "Store", "StoredColumn", "VbpColumn", "VbsColumn",
    "ZipfSpec", "advise", "advise_column", "auc", "bitvector_and",
    "bitvector_or", "build_bitpacked", "build_byteslice",
    "build_frequency_table", "build_vbp", "build_vbs", "compare_codes",
    "execute", "gen_zipf", "ingest", "lookup_bitpacked", "lookup_byteslice",
    "lookup_vbp", "lookup_vbs", "read_store", "scan_bitpacked",
    "scan_byteslice", "scan_vbp", "scan_vbs", "vbs_size_report", "write_store",
]
