"""Tightly bit-packed storage.

Code i occupies bit positions [i*w, (i+1)*w) of one contiguous stream,
most significant bit first, ignoring byte boundaries.  Scans must unpack
every code before comparing, so there is no early stop; that cost is the
point of keeping this layout around as a baseline.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bitvector import ResultBitVector
from .predicate import Op, ResolvedPredicate

__all__ = ["BitPackedColumn", "build_bitpacked", "scan_bitpacked",
           "lookup_bitpacked", "byte_span", "bitpacked_size_report"]

_CHUNK = 1 << 20  # rows per unpack batch; multiple of 8 keeps byte alignment


@dataclass
class BitPackedColumn:
    n_rows: int
    w: int
    bits: np.ndarray  # packed uint8 stream, zero padded to a byte boundary

    @property
    def total_bits(self) -> int:
        return self.n_rows * self.w


def build_bitpacked(codes, w: int) -> BitPackedColumn:
    arr = np.ascontiguousarray(codes, dtype=np.uint64)
    n = len(arr)
    if n == 0:
        raise ValueError("empty column")
    if not 1 <= w <= 32:
        raise ValueError("width must be 1..32 bits")
    if w < 64 and (arr >> np.uint64(w)).any():
        raise ValueError("code out of range for width")
    out = np.zeros((n * w + 7) // 8, dtype=np.uint8)
    pos = 0
    shifts = np.arange(w - 1, -1, -1, dtype=np.uint64)
    for lo in range(0, n, _CHUNK):
        chunk = arr[lo: lo + _CHUNK]
        flags = ((chunk[:, None] >> shifts) & np.uint64(1)).astype(np.uint8)
        packed = np.packbits(flags.ravel())
        out[pos: pos + len(packed)] = packed
        pos += len(chunk) * w // 8
    return BitPackedColumn(n, w, out)


def _unpack_chunk(col: BitPackedColumn, lo: int, hi: int) -> np.ndarray:
    """Codes lo..hi as plain integers via an 8-byte gather window."""
    w = col.w
    start = np.arange(lo, hi, dtype=np.int64) * w
    off = start >> 3
    padded = np.zeros(len(col.bits) + 8, dtype=np.uint8)
    padded[: len(col.bits)] = col.bits
    window = np.lib.stride_tricks.sliding_window_view(padded, 8)
    raw = np.ascontiguousarray(window[off]).view(">u8").ravel().astype(np.uint64)
    shift = np.uint64(64 - w) - (start & 7).astype(np.uint64)
    return (raw >> shift) & np.uint64((1 << w) - 1)


def unpack_all(col: BitPackedColumn) -> np.ndarray:
    parts = [_unpack_chunk(col, lo, min(lo + _CHUNK, col.n_rows))
             for lo in range(0, col.n_rows, _CHUNK)]
    return parts[0] if len(parts) == 1 else np.concatenate(parts)


def _flags_for(op: Op, values: np.ndarray, pred: ResolvedPredicate) -> np.ndarray:
    c = np.uint64(pred.code)
    if op is Op.EQ:
        return values == c
    if op is Op.NE:
        return values != c
    if op is Op.LT:
        return values < c
    if op is Op.LE:
        return values <= c
    if op is Op.GT:
        return values > c
    if op is Op.GE:
        return values >= c
    if op is Op.BETWEEN:
        return (values >= c) & (values <= np.uint64(pred.code2))
    raise ValueError(f"unsupported scan operator {op}")


def scan_bitpacked(col: BitPackedColumn, pred: ResolvedPredicate,
                   mask: ResultBitVector | None = None,
                   threads: int = 1) -> ResultBitVector:
    """Unpack, compare, post-AND the input mask.  Never stops early."""
    if mask is not None and mask.n_rows != col.n_rows:
        raise ValueError("input mask length mismatch")
    if pred.is_trivial:
        out = (ResultBitVector.ones(col.n_rows) if pred.trivial
               else ResultBitVector.zeros(col.n_rows))
        return out & mask if mask is not None and pred.trivial else out

    spans = [(lo, min(lo + _CHUNK, col.n_rows))
             for lo in range(0, col.n_rows, _CHUNK)]

    def run(span):
        return _flags_for(pred.op, _unpack_chunk(col, *span), pred)

    if threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, spans))
    else:
        parts = [run(s) for s in spans]
    flags = parts[0] if len(parts) == 1 else np.concatenate(parts)
    out = ResultBitVector.from_bools(flags)
    return out & mask if mask is not None else out


def byte_span(col: BitPackedColumn, row: int) -> tuple[int, int]:
    """Inclusive byte range [first, last] that code `row` (0-based) spans."""
    start = row * col.w
    return start >> 3, (start + col.w - 1) >> 3


def lookup_bitpacked(col: BitPackedColumn, selection: ResultBitVector
                     ) -> np.ndarray:
    """Selected codes, gathering each row's spanning bytes."""
    if selection.n_rows != col.n_rows:
        raise ValueError("selection length mismatch")
    rows = selection.to_indices()
    if len(rows) == 0:
        return np.zeros(0, dtype=np.uint64)
    w = col.w
    start = rows * w
    padded = np.zeros(len(col.bits) + 8, dtype=np.uint8)
    padded[: len(col.bits)] = col.bits
    window = np.lib.stride_tricks.sliding_window_view(padded, 8)
    raw = np.ascontiguousarray(window[start >> 3]).view(">u8").ravel()
    shift = np.uint64(64 - w) - (start & 7).astype(np.uint64)
    return (raw.astype(np.uint64) >> shift) & np.uint64((1 << w) - 1)


def bitpacked_size_report(col: BitPackedColumn) -> dict:
    return {
        "total_bytes": len(col.bits),
        "avg_bits_per_code": col.w,
    }
