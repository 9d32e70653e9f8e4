"""Variable byte slice storage for prefix-preserving variable-length codes.

Codes of up to K bytes are stored by byte position: slice 1 holds every
code's first byte, slice j >= 2 holds the j-th byte of only those codes
long enough to have one, packed densely in row order.  One existence
bitmask per deep slice records which rows continue, and a per-block offset
directory locates each block's bytes inside the packed slices so scans can
start anywhere.

Scans compare blocks of lane_count codes one byte level at a time against
a zero-padded literal, maintaining greater-than and still-equal lane masks.
A block stops as soon as no lane can still be equal, and existence bits
settle comparisons that run past either side's last byte.  The vectorized
entry points process one level across every still-active block at once;
``scan_serial`` and ``lookup_serial`` walk block by block with the scalar
bit kernels and define the reference semantics.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import bits
from .bitvector import ResultBitVector
from .predicate import DEFAULT_LANES, LaneConfig, Op, ResolvedPredicate
from .stats import LookupStats, ScanStats

__all__ = [
    "VbsColumn",
    "build_vbs",
    "scan_vbs",
    "lookup_vbs",
    "vbs_size_report",
    "scan_serial",
    "lookup_serial",
]


@dataclass
class VbsColumn:
    """One column in variable byte slice form."""

    n_rows: int
    max_len: int
    lanes: LaneConfig
    slices: list          # slices[0] padded to n_blocks*L bytes; rest packed exact
    exist_bits: list      # per slice j>=2: packed row bits, n_blocks*L/8 bytes
    block_dir: np.ndarray  # (max_len-1, n_blocks+1) int64 offsets into slices[j]
    lane_of: list         # per slice j>=2: lane index of each packed byte
    word_pops: list       # per slice j>=2: prefix popcounts per 32-bit mask word

    @property
    def n_blocks(self) -> int:
        return self.lanes.n_blocks(self.n_rows)

    def mask_words(self, j: int) -> np.ndarray:
        """Existence mask of slice j viewed as one word per block."""
        return self.exist_bits[j - 2].view(self.lanes.word_dtype)

    def slice_len(self, j: int) -> int:
        """Stored byte count of slice j (1-based)."""
        return self.n_rows if j == 1 else len(self.slices[j - 1])


def build_vbs(row_codes, row_lengths, lanes: LaneConfig = DEFAULT_LANES) -> VbsColumn:
    """Lay out per-row codes (big-endian ints) and byte lengths."""
    codes = np.ascontiguousarray(row_codes, dtype=np.uint64)
    lens = np.ascontiguousarray(row_lengths, dtype=np.uint8)
    n = len(codes)
    if n == 0:
        raise ValueError("empty column")
    if len(lens) != n:
        raise ValueError("codes and lengths differ in length")
    if lens.min() < 1 or lens.max() > 8:
        raise ValueError("code lengths must be 1..8 bytes")
    max_len = int(lens.max())
    wide = lens < 8
    if (codes[wide] >> (np.uint64(8) * lens[wide].astype(np.uint64))).any():
        raise ValueError("code wider than its declared length")

    L = lanes.lane_count
    n_blocks = lanes.n_blocks(n)
    padded_rows = n_blocks * L

    first = np.zeros(padded_rows, dtype=np.uint8)
    shift = (lens.astype(np.uint64) - 1) * np.uint64(8)
    first[:n] = ((codes >> shift) & np.uint64(0xFF)).astype(np.uint8)
    slices = [first]
    exist_bits = []
    lane_of = []
    word_pops = []
    block_dir = np.zeros((max(max_len - 1, 0), n_blocks + 1), dtype=np.int64)

    for j in range(2, max_len + 1):
        rows_j = np.flatnonzero(lens >= j)
        shift = (lens[rows_j].astype(np.uint64) - j) * np.uint64(8)
        slices.append(((codes[rows_j] >> shift) & np.uint64(0xFF)).astype(np.uint8))
        flags = np.zeros(padded_rows, dtype=bool)
        flags[rows_j] = True
        packed = np.packbits(flags, bitorder="little")
        exist_bits.append(packed)
        counts = np.bincount(rows_j // L, minlength=n_blocks)
        np.cumsum(counts, out=block_dir[j - 2, 1:])
        lane_of.append((rows_j % L).astype(np.uint8))
        w32 = _pad_bytes(packed, 4).view(np.uint32)
        pops = np.zeros(len(w32) + 1, dtype=np.int64)
        np.cumsum(np.bitwise_count(w32).astype(np.int64), out=pops[1:])
        word_pops.append(pops)

    return VbsColumn(n, max_len, lanes, slices, exist_bits, block_dir,
                     lane_of, word_pops)


# ---------------------------------------------------------------------------
# shared word plumbing (also used by the other layouts)


def _pad_bytes(arr: np.ndarray, multiple: int) -> np.ndarray:
    if len(arr) % multiple == 0:
        return arr
    out = np.zeros(-(-len(arr) // multiple) * multiple, dtype=np.uint8)
    out[: len(arr)] = arr
    return out


def _valid_words(n_rows: int, lanes: LaneConfig) -> np.ndarray:
    """All-ones lane words with the tail block truncated to real rows."""
    dt = lanes.word_dtype
    words = np.full(lanes.n_blocks(n_rows), np.iinfo(dt).max, dtype=dt)
    tail = n_rows % lanes.lane_count
    if tail:
        words[-1] = dt((1 << tail) - 1)
    return words


def _mask_to_words(mask: ResultBitVector | None, n_rows: int,
                   lanes: LaneConfig) -> np.ndarray:
    """Input bitvector as one word per block, AND tail validity."""
    valid = _valid_words(n_rows, lanes)
    if mask is None:
        return valid
    if mask.n_rows != n_rows:
        raise ValueError("input mask length mismatch")
    need = lanes.n_blocks(n_rows) * (lanes.lane_count // 8)
    raw = mask.words.view(np.uint8)
    if len(raw) < need:
        buf = np.zeros(need, dtype=np.uint8)
        buf[: len(raw)] = raw
        raw = buf
    raw = np.ascontiguousarray(raw[:need])
    return raw.view(lanes.word_dtype) & valid


def _words_to_bitvector(words: np.ndarray, n_rows: int) -> ResultBitVector:
    raw = words.view(np.uint8)
    need = ((n_rows + 31) // 32) * 4
    if len(raw) >= need:
        raw = np.ascontiguousarray(raw[:need])
    else:
        buf = np.zeros(need, dtype=np.uint8)
        buf[: len(raw)] = raw
        raw = buf
    return ResultBitVector(n_rows, raw.view(np.uint32))


def _pack_lanes(flags: np.ndarray, lanes: LaneConfig) -> np.ndarray:
    """(n, L) bools to one lane word per row group."""
    packed = np.packbits(flags, axis=1, bitorder="little")
    return packed.view(lanes.word_dtype).ravel()


def _literal_bytes(code: int, length: int) -> list[int]:
    return [(code >> (8 * (length - j))) & 0xFF for j in range(1, length + 1)]


def _finalize(op: Op, gt, eq, valid):
    """Derive any comparison from greater-than and equal masks.

    Works on lane-word arrays and on plain ints alike; complements are
    masked back to the valid (input AND tail) lanes.
    """
    if op is Op.GT:
        return gt
    if op is Op.GE:
        return gt | eq
    if op is Op.EQ:
        return eq
    if op is Op.NE:
        return valid & ~eq
    if op is Op.LT:
        return valid & ~(gt | eq)
    if op is Op.LE:
        return valid & ~gt
    raise ValueError(f"unsupported scan operator {op}")


def _trivial_result(value: bool, n_rows: int, lanes: LaneConfig,
                    mask: ResultBitVector | None, levels: int):
    nb = lanes.n_blocks(n_rows)
    stats = ScanStats(levels=levels, blocks_total=nb, blocks_skipped=nb,
                      block_depth=np.zeros(nb, dtype=np.int8))
    if not value:
        return ResultBitVector.zeros(n_rows), stats
    out = _words_to_bitvector(_mask_to_words(mask, n_rows, lanes), n_rows)
    return out, stats


def _block_ranges(n_blocks: int, threads: int, align: int) -> list[tuple[int, int]]:
    threads = max(1, min(threads, n_blocks))
    step = -(-n_blocks // threads)
    step = -(-step // align) * align
    return [(lo, min(lo + step, n_blocks)) for lo in range(0, n_blocks, step)]


# ---------------------------------------------------------------------------
# vectorized scan


def _scan_range_vbs(col: VbsColumn, code: int, length: int,
                    init_words: np.ndarray, b0: int, b1: int):
    """GT/EQ state machine over blocks [b0, b1)."""
    lanes = col.lanes
    L = lanes.lane_count
    dt = lanes.word_dtype
    K = col.max_len
    lit = _literal_bytes(code, length)
    nb = b1 - b0

    valid = init_words[b0:b1]
    z_eq = valid.copy()
    z_gt = np.zeros(nb, dtype=dt)
    eq_final = np.zeros(nb, dtype=dt)
    depth = np.zeros(nb, dtype=np.int8)
    stats = ScanStats(levels=K, blocks_total=nb,
                      blocks_skipped=int((valid == 0).sum()))

    first2d = col.slices[0].reshape(-1, L)
    for j in range(1, length + 1):
        active = np.flatnonzero(z_eq)
        if len(active) == 0:
            break
        depth[active] = j
        stats.words_loaded[j - 1] += len(active)
        if j == 1:
            rows = first2d[b0:b1] if len(active) == nb else first2d[b0 + active]
            m_gt = _pack_lanes(rows > lit[0], lanes)
            m_eq = _pack_lanes(rows == lit[0], lanes)
            stats.bytes_loaded[0] += len(active) * L
        else:
            dir_j = col.block_dir[j - 2]
            starts = dir_j[b0 + active]
            counts = dir_j[b0 + active + 1] - starts
            total = int(counts.sum())
            stats.bytes_loaded[j - 1] += total
            gt_flags = np.zeros((len(active), L), dtype=bool)
            eq_flags = np.zeros((len(active), L), dtype=bool)
            if total:
                owner = np.repeat(np.arange(len(active)), counts)
                base = np.cumsum(counts) - counts
                pos = (np.repeat(starts, counts)
                       + np.arange(total, dtype=np.int64)
                       - np.repeat(base, counts))
                data = col.slices[j - 1][pos]
                lane = col.lane_of[j - 2][pos]
                gt_flags[owner, lane] = data > lit[j - 1]
                eq_flags[owner, lane] = data == lit[j - 1]
            m_gt = _pack_lanes(gt_flags, lanes)
            m_eq = _pack_lanes(eq_flags, lanes)
        z = z_eq[active]
        if j < length:
            nxt = col.mask_words(j + 1)[b0 + active]
            z_gt[active] |= z & m_gt
            z_eq[active] = z & m_eq & nxt
        elif length < K:
            nxt = col.mask_words(j + 1)[b0 + active]
            still = z & m_eq
            z_gt[active] |= (z & m_gt) | (still & nxt)
            eq_final[active] = still & ~nxt
        else:
            z_gt[active] |= z & m_gt
            eq_final[active] = z & m_eq

    live = nb - stats.blocks_skipped
    stats.mask_bytes = live * (L // 8) * (min(length + 1, K) - 1)
    stats.block_depth = depth
    return z_gt, eq_final, valid, stats


def scan_vbs(col: VbsColumn, pred: ResolvedPredicate,
             mask: ResultBitVector | None = None,
             threads: int = 1) -> tuple[ResultBitVector, ScanStats]:
    """Evaluate one resolved predicate; returns result bits and access stats."""
    lanes = col.lanes
    if pred.is_trivial:
        return _trivial_result(pred.trivial, col.n_rows, lanes, mask, col.max_len)
    if pred.op is Op.BETWEEN:
        low = ResolvedPredicate.compare(Op.GE, pred.code, pred.length)
        high = ResolvedPredicate.compare(Op.LE, pred.code2, pred.length2)
        out, st1 = scan_vbs(col, low, mask, threads)
        out, st2 = scan_vbs(col, high, out, threads)
        return out, st1.merge(st2)

    init = _mask_to_words(mask, col.n_rows, lanes)
    ranges = _block_ranges(col.n_blocks, threads, max(1, 32 // lanes.lane_count))

    def run(span):
        return _scan_range_vbs(col, pred.code, pred.length, init, *span)

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


# ---------------------------------------------------------------------------
# vectorized lookup


def lookup_vbs(col: VbsColumn, selection: ResultBitVector
               ) -> tuple[np.ndarray, LookupStats]:
    """Padded codes of the selected rows, in ascending row order.

    Padding zeros occupy the low bytes, so results compare like K-byte
    big-endian integers and feed Dictionary.decode_padded directly.
    """
    if selection.n_rows != col.n_rows:
        raise ValueError("selection length mismatch")
    rows = selection.to_indices()
    stats = LookupStats()
    K = col.max_len
    out = np.zeros(len(rows), dtype=np.uint64)
    if len(rows) == 0:
        return out, stats
    stats.levels_touched = 1
    stats.bytes_loaded += len(rows)
    stats.mask_bytes = int((selection.words != 0).sum()) * (K - 1) * 4
    out |= col.slices[0][rows].astype(np.uint64) << np.uint64(8 * (K - 1))
    # Rows with a byte at level j are a subset of those with one at j-1,
    # so each level inspects only the survivors of the previous one.
    alive = rows
    pos = None
    for j in range(2, K + 1):
        w32 = _pad_bytes(col.exist_bits[j - 2], 4).view(np.uint32)
        word = alive >> 5
        w = w32[word]
        bit = (alive & 31).astype(np.uint32)
        has = ((w >> bit) & np.uint32(1)).astype(bool)
        if not has.any():
            break
        stats.levels_touched = j
        w, word, bit = w[has], word[has], bit[has]
        alive = alive[has]
        pos = np.flatnonzero(has) if pos is None else pos[has]
        stats.bytes_loaded += len(alive)
        below = (np.uint32(1) << bit) - np.uint32(1)
        rank = col.word_pops[j - 2][word] + np.bitwise_count(w & below)
        out[pos] |= (col.slices[j - 1][rank].astype(np.uint64)
                     << np.uint64(8 * (K - j)))
    return out, stats


# ---------------------------------------------------------------------------
# serial reference implementations


def scan_serial(col: VbsColumn, pred: ResolvedPredicate,
                mask: ResultBitVector | None = None
                ) -> tuple[ResultBitVector, ScanStats]:
    """Block-at-a-time reference scan using the scalar bit kernels."""
    lanes = col.lanes
    if pred.is_trivial:
        return _trivial_result(pred.trivial, col.n_rows, lanes, mask, col.max_len)
    if pred.op is Op.BETWEEN:
        low = ResolvedPredicate.compare(Op.GE, pred.code, pred.length)
        high = ResolvedPredicate.compare(Op.LE, pred.code2, pred.length2)
        out, st1 = scan_serial(col, low, mask)
        out, st2 = scan_serial(col, high, out)
        return out, st1.merge(st2)

    L = lanes.lane_count
    K = col.max_len
    length = pred.length
    lit = _literal_bytes(pred.code, pred.length)
    init = _mask_to_words(mask, col.n_rows, lanes)
    nb = col.n_blocks
    stats = ScanStats(levels=K, blocks_total=nb)
    depth = np.zeros(nb, dtype=np.int8)
    out_words = np.zeros(nb, dtype=np.uint64)
    first2d = col.slices[0].reshape(nb, L)

    for b in range(nb):
        valid = int(init[b])
        if valid == 0:
            stats.blocks_skipped += 1
            continue
        masks = {j: int(col.mask_words(j)[b])
                 for j in range(2, min(length + 1, K) + 1)}
        stats.mask_bytes += (L // 8) * len(masks)
        z_eq = valid
        z_gt = 0
        eq_final = 0
        for j in range(1, length + 1):
            if z_eq == 0:
                break
            depth[b] = j
            stats.words_loaded[j - 1] += 1
            if j == 1:
                block = first2d[b]
                m_gt = 0
                m_eq = 0
                for lane in range(L):
                    v = int(block[lane])
                    if v > lit[0]:
                        m_gt |= 1 << lane
                    elif v == lit[0]:
                        m_eq |= 1 << lane
                stats.bytes_loaded[0] += L
            else:
                exist = masks[j]
                start = int(col.block_dir[j - 2][b])
                count = bits.popcount(exist)
                seg = col.slices[j - 1][start: start + count]
                stats.bytes_loaded[j - 1] += count
                packed_gt = 0
                packed_eq = 0
                for k in range(count):
                    v = int(seg[k])
                    if v > lit[j - 1]:
                        packed_gt |= 1 << k
                    elif v == lit[j - 1]:
                        packed_eq |= 1 << k
                m_gt = bits.pdep(packed_gt, exist)
                m_eq = bits.pdep(packed_eq, exist)
            if j < length:
                z_gt |= z_eq & m_gt
                z_eq = z_eq & m_eq & masks[j + 1]
            elif length < K:
                still = z_eq & m_eq
                z_gt |= (z_eq & m_gt) | (still & masks[j + 1])
                eq_final = still & ~masks[j + 1]
                z_eq = 0
            else:
                z_gt |= z_eq & m_gt
                eq_final = z_eq & m_eq
        out_words[b] = _finalize(pred.op, z_gt, eq_final, valid)
    stats.block_depth = depth
    packed = out_words.astype(np.uint64)
    lane_words = np.zeros(nb, dtype=lanes.word_dtype)
    lane_words[:] = packed
    return _words_to_bitvector(lane_words, col.n_rows), stats


def lookup_serial(col: VbsColumn, selection: ResultBitVector) -> np.ndarray:
    """Word-at-a-time reference lookup driven by the E/P bit kernels."""
    if selection.n_rows != col.n_rows:
        raise ValueError("selection length mismatch")
    if col.lanes.lane_count != 32:
        raise NotImplementedError("reference lookup assumes 32-code blocks")
    K = col.max_len
    W = 32
    out = []
    for b, x in enumerate(selection.words.tolist()):
        if x == 0:
            continue
        exist = [int(col.mask_words(j)[b]) for j in range(2, K + 1)]
        beta = 1
        for j in range(2, K + 1):
            if x & exist[j - 2] == 0:
                break
            beta = j
        deep = [bits.pext(x, exist[j - 2]) for j in range(2, beta + 1)]
        while x:
            lane = bits.lowest_set_index(x, W)
            code = int(col.slices[0][b * W + lane])
            x = bits.erase_rightmost(x)
            appended = 1
            for j in range(2, beta + 1):
                if exist[j - 2] & (1 << lane) == 0:
                    break
                xj = deep[j - 2]
                offset = int(col.block_dir[j - 2][b]) + bits.lowest_set_index(xj, W)
                code = (code << 8) + int(col.slices[j - 1][offset])
                deep[j - 2] = bits.erase_rightmost(xj)
                appended = j
            out.append(code << (8 * (K - appended)))
    return np.array(out, dtype=np.uint64)


# ---------------------------------------------------------------------------
# size accounting


def vbs_size_report(col: VbsColumn) -> dict:
    """Stored footprint; the directory is excluded from the per-code average."""
    slice_bytes = [col.slice_len(j) for j in range(1, col.max_len + 1)]
    mask_bytes = ((col.n_rows + 7) // 8) * (col.max_len - 1)
    dir_bytes = col.n_blocks * (col.max_len - 1) * 4
    data = sum(slice_bytes) + mask_bytes
    return {
        "slice_bytes": slice_bytes,
        "mask_bytes": mask_bytes,
        "directory_bytes": dir_bytes,
        "total_bytes": data + dir_bytes,
        "avg_bits_per_code": 8.0 * data / col.n_rows,
    }
