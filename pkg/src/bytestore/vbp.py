"""Vertical bit-parallel storage (plain and padded-encoding variants).

Plane j holds the j-th most significant bit of every code; a scan walks
planes top down over 32-bit word blocks, keeping greater-than and
still-equal masks, and stops as soon as no lane can still be equal.  The
padded variant stores prefix-free codes zero-padded to the longest
assigned length; padding preserves both equality and order because no
code is a prefix of another and codes are assigned in value order.

Lookups are the layout's weak spot: every selected row gathers one bit
from each of the w_max planes.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bitvector import ResultBitVector
from .predicate import Op, ResolvedPredicate
from .stats import LookupStats, ScanStats

__all__ = ["VbpColumn", "build_vbp", "pad_codes", "scan_vbp", "lookup_vbp",
           "vbp_size_report"]

_WORD = 32


@dataclass
class VbpColumn:
    n_rows: int
    w_max: int
    kind: str              # "plain" | "padded_encoding"
    planes: np.ndarray     # (w_max, n_words) uint32, bit i of word b = row b*32+i

    @property
    def n_words(self) -> int:
        return (self.n_rows + _WORD - 1) // _WORD


def pad_codes(codes, lengths, w_max: int) -> np.ndarray:
    """Zero-pad variable bit-length codes up to w_max bits."""
    arr = np.ascontiguousarray(codes, dtype=np.uint64)
    lens = np.ascontiguousarray(lengths, dtype=np.uint64)
    if lens.max(initial=0) > w_max:
        raise ValueError("code longer than padded width")
    return arr << (np.uint64(w_max) - lens)


def build_vbp(codes, w_max: int, kind: str = "plain") -> VbpColumn:
    arr = np.ascontiguousarray(codes, dtype=np.uint64)
    n = len(arr)
    if n == 0:
        raise ValueError("empty column")
    if kind not in ("plain", "padded_encoding"):
        raise ValueError(f"unknown vbp kind {kind!r}")
    if not 1 <= w_max <= 32:
        raise ValueError("plane count must be 1..32")
    if w_max < 64 and (arr >> np.uint64(w_max)).any():
        raise ValueError("code out of range for width")
    n_words = (n + _WORD - 1) // _WORD
    planes = np.zeros((w_max, n_words), dtype=np.uint32)
    for j in range(w_max):
        flags = ((arr >> np.uint64(w_max - 1 - j)) & np.uint64(1)).astype(bool)
        raw = np.packbits(flags, bitorder="little")
        buf = np.zeros(n_words * 4, dtype=np.uint8)
        buf[: len(raw)] = raw
        planes[j] = buf.view(np.uint32)
    return VbpColumn(n, w_max, kind, planes)


def _valid_words32(n_rows: int) -> np.ndarray:
    n_words = (n_rows + _WORD - 1) // _WORD
    words = np.full(n_words, np.iinfo(np.uint32).max, dtype=np.uint32)
    tail = n_rows % _WORD
    if tail:
        words[-1] = np.uint32((1 << tail) - 1)
    return words


def _literal_bits(col: VbpColumn, pred_code: int, pred_length: int) -> int:
    """Literal code aligned to the stored w_max planes."""
    if col.kind == "padded_encoding":
        return pred_code << (col.w_max - pred_length)
    return pred_code


def _trivial_vbp(value: bool, col: VbpColumn, mask: ResultBitVector | None):
    n_words = col.n_words
    stats = ScanStats(levels=col.w_max, blocks_total=n_words,
                      blocks_skipped=n_words,
                      block_depth=np.zeros(n_words, dtype=np.int8))
    if not value:
        return ResultBitVector.zeros(col.n_rows), stats
    words = _valid_words32(col.n_rows)
    if mask is not None:
        if mask.n_rows != col.n_rows:
            raise ValueError("input mask length mismatch")
        words = words & mask.words
    return ResultBitVector(col.n_rows, words.copy()), stats


def _scan_range_vbp(col: VbpColumn, literal: int, init: np.ndarray,
                    b0: int, b1: int):
    nb = b1 - b0
    valid = init[b0:b1]
    z_eq = valid.copy()
    z_gt = np.zeros(nb, dtype=np.uint32)
    depth = np.zeros(nb, dtype=np.int8)
    stats = ScanStats(levels=col.w_max, blocks_total=nb,
                      blocks_skipped=int((valid == 0).sum()))
    for j in range(1, col.w_max + 1):
        active = np.flatnonzero(z_eq)
        if len(active) == 0:
            break
        depth[active] = j
        stats.words_loaded[j - 1] += len(active)
        stats.bytes_loaded[j - 1] += len(active) * 4
        d = col.planes[j - 1][b0 + active]
        z = z_eq[active]
        if (literal >> (col.w_max - j)) & 1:
            z_eq[active] = z & d
        else:
            z_gt[active] |= z & d
            z_eq[active] = z & ~d
    stats.block_depth = depth
    return z_gt, z_eq, valid, stats


def scan_vbp(col: VbpColumn, pred: ResolvedPredicate,
             mask: ResultBitVector | None = None,
             threads: int = 1) -> tuple[ResultBitVector, ScanStats]:
    """Bit-serial scan, one plane at a time, early stop per word block."""
    if pred.is_trivial:
        return _trivial_vbp(pred.trivial, col, mask)
    if pred.op is Op.BETWEEN:
        low = ResolvedPredicate.compare(Op.GE, pred.code, pred.length)
        high = ResolvedPredicate.compare(Op.LE, pred.code2, pred.length2)
        out, st1 = scan_vbp(col, low, mask, threads)
        out, st2 = scan_vbp(col, high, out, threads)
        return out, st1.merge(st2)

    init = _valid_words32(col.n_rows)
    if mask is not None:
        if mask.n_rows != col.n_rows:
            raise ValueError("input mask length mismatch")
        init = init & mask.words
    literal = _literal_bits(col, pred.code, pred.length)
    n_words = col.n_words
    step = max(1, -(-n_words // max(1, threads)))
    ranges = [(lo, min(lo + step, n_words)) for lo in range(0, n_words, step)]

    def run(span):
        return _scan_range_vbp(col, literal, init, *span)

    if len(ranges) == 1:
        parts = [run(ranges[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(ranges)) as pool:
            parts = list(pool.map(run, ranges))
    gt = np.concatenate([p[0] for p in parts])
    eq = np.concatenate([p[1] for p in parts])
    valid = np.concatenate([p[2] for p in parts])
    stats = parts[0][3]
    for p in parts[1:]:
        stats = stats.concat(p[3])

    if pred.op is Op.GT:
        words = gt
    elif pred.op is Op.GE:
        words = gt | eq
    elif pred.op is Op.EQ:
        words = eq
    elif pred.op is Op.NE:
        words = valid & ~eq
    elif pred.op is Op.LT:
        words = valid & ~(gt | eq)
    elif pred.op is Op.LE:
        words = valid & ~gt
    else:
        raise ValueError(f"unsupported scan operator {pred.op}")
    return ResultBitVector(col.n_rows, words.copy()), stats


def lookup_vbp(col: VbpColumn, selection: ResultBitVector
               ) -> tuple[np.ndarray, LookupStats]:
    """Padded codes of the selected rows; touches every plane per row."""
    if selection.n_rows != col.n_rows:
        raise ValueError("selection length mismatch")
    rows = selection.to_indices()
    stats = LookupStats()
    out = np.zeros(len(rows), dtype=np.uint64)
    if len(rows) == 0:
        return out, stats
    word = rows >> 5
    bit = (rows & 31).astype(np.uint32)
    stats.levels_touched = col.w_max
    stats.bytes_loaded = len(rows) * col.w_max * 4
    for j in range(col.w_max):
        b = (col.planes[j][word] >> bit) & np.uint32(1)
        out = (out << np.uint64(1)) | b.astype(np.uint64)
    return out, stats


def vbp_size_report(col: VbpColumn) -> dict:
    data = col.w_max * col.n_words * 4
    return {
        "total_bytes": data,
        "avg_bits_per_code": 8.0 * data / col.n_rows,
    }
