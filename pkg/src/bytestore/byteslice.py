"""Fixed-width byte slice storage.

Every code is stored in ceil(w/8) byte slices, left-aligned: codes are
shifted up so the most significant payload bit sits at the top of the
first byte.  Slice j holds byte j of every row, so no existence masks or
offset directories are needed; scans stop early once no lane can still
match, exactly like the variable layout but with dense slices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bitvector import ResultBitVector
from .predicate import DEFAULT_LANES, LaneConfig, Op, ResolvedPredicate
from .stats import LookupStats, ScanStats
from .vbs import (
    _block_ranges,
    _finalize,
    _literal_bytes,
    _mask_to_words,
    _pack_lanes,
    _trivial_result,
    _words_to_bitvector,
)
from concurrent.futures import ThreadPoolExecutor

__all__ = ["ByteSliceColumn", "build_byteslice", "scan_byteslice",
           "lookup_byteslice", "byteslice_size_report"]


@dataclass
class ByteSliceColumn:
    """One column of w-bit codes split into full byte slices."""

    n_rows: int
    width_bits: int
    lanes: LaneConfig
    slices: np.ndarray  # (n_slices, n_blocks*L) uint8, left-aligned

    @property
    def n_slices(self) -> int:
        return len(self.slices)

    @property
    def n_blocks(self) -> int:
        return self.lanes.n_blocks(self.n_rows)


def _align_code(code: int, width_bits: int, n_slices: int) -> int:
    return code << (8 * n_slices - width_bits)


def build_byteslice(codes, width_bits: int,
                    lanes: LaneConfig = DEFAULT_LANES) -> ByteSliceColumn:
    arr = np.ascontiguousarray(codes, dtype=np.uint64)
    n = len(arr)
    if n == 0:
        raise ValueError("empty column")
    if not 1 <= width_bits <= 64:
        raise ValueError("width must be 1..64 bits")
    if width_bits < 64 and (arr >> np.uint64(width_bits)).any():
        raise ValueError("code wider than declared width")
    n_slices = -(-width_bits // 8)
    padded = lanes.n_blocks(n) * lanes.lane_count
    aligned = arr << np.uint64(8 * n_slices - width_bits)
    slices = np.zeros((n_slices, padded), dtype=np.uint8)
    for j in range(n_slices):
        shift = np.uint64(8 * (n_slices - 1 - j))
        slices[j, :n] = ((aligned >> shift) & np.uint64(0xFF)).astype(np.uint8)
    return ByteSliceColumn(n, width_bits, lanes, slices)


def _scan_range_bs(col: ByteSliceColumn, code: int,
                   init_words: np.ndarray, b0: int, b1: int):
    lanes = col.lanes
    L = lanes.lane_count
    K = col.n_slices
    lit = _literal_bytes(_align_code(code, col.width_bits, K), K)
    nb = b1 - b0

    valid = init_words[b0:b1]
    z_eq = valid.copy()
    z_gt = np.zeros(nb, dtype=lanes.word_dtype)
    depth = np.zeros(nb, dtype=np.int8)
    stats = ScanStats(levels=K, blocks_total=nb,
                      blocks_skipped=int((valid == 0).sum()))

    for j in range(1, K + 1):
        active = np.flatnonzero(z_eq)
        if len(active) == 0:
            break
        depth[active] = j
        stats.words_loaded[j - 1] += len(active)
        stats.bytes_loaded[j - 1] += len(active) * L
        plane = col.slices[j - 1].reshape(-1, L)
        rows = plane[b0:b1] if len(active) == nb else plane[b0 + active]
        m_gt = _pack_lanes(rows > lit[j - 1], lanes)
        m_eq = _pack_lanes(rows == lit[j - 1], lanes)
        z = z_eq[active]
        z_gt[active] |= z & m_gt
        z_eq[active] = z & m_eq
    stats.block_depth = depth
    return z_gt, z_eq, valid, stats


def scan_byteslice(col: ByteSliceColumn, pred: ResolvedPredicate,
                   mask: ResultBitVector | None = None,
                   threads: int = 1) -> tuple[ResultBitVector, ScanStats]:
    lanes = col.lanes
    if pred.is_trivial:
        return _trivial_result(pred.trivial, col.n_rows, lanes, mask, col.n_slices)
    if pred.op is Op.BETWEEN:
        low = ResolvedPredicate.compare(Op.GE, pred.code, pred.length)
        high = ResolvedPredicate.compare(Op.LE, pred.code2, pred.length2)
        out, st1 = scan_byteslice(col, low, mask, threads)
        out, st2 = scan_byteslice(col, high, out, threads)
        return out, st1.merge(st2)

    init = _mask_to_words(mask, col.n_rows, lanes)
    ranges = _block_ranges(col.n_blocks, threads, max(1, 32 // lanes.lane_count))

    def run(span):
        return _scan_range_bs(col, pred.code, init, *span)

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
    words = _finalize(pred.op, gt, eq, valid)
    return _words_to_bitvector(words, col.n_rows), stats


def lookup_byteslice(col: ByteSliceColumn, selection: ResultBitVector
                     ) -> tuple[np.ndarray, LookupStats]:
    """Codes of the selected rows (right-aligned plain integers)."""
    if selection.n_rows != col.n_rows:
        raise ValueError("selection length mismatch")
    rows = selection.to_indices()
    stats = LookupStats()
    K = col.n_slices
    out = np.zeros(len(rows), dtype=np.uint64)
    if len(rows) == 0:
        return out, stats
    stats.levels_touched = K
    stats.bytes_loaded = len(rows) * K
    for j in range(K):
        out = (out << np.uint64(8)) | col.slices[j][rows].astype(np.uint64)
    return out >> np.uint64(8 * K - col.width_bits), stats


def byteslice_size_report(col: ByteSliceColumn) -> dict:
    data = col.n_slices * col.n_rows
    return {
        "slice_bytes": [col.n_rows] * col.n_slices,
        "mask_bytes": 0,
        "directory_bytes": 0,
        "total_bytes": data,
        "avg_bits_per_code": 8.0 * data / col.n_rows,
    }
