"""Dictionary encoders mapping column values to short comparable codes.

Three code assignment schemes cover the storage layouts:

* fixed: every value gets the same bit width w = ceil(log2(n)), code = rank.
* prefix preserving (byte granular, variable length): frequent values get
  short byte strings, and zero-padding every code to the maximum length K
  preserves the value order of the padded codes.  Numeric columns keep
  their value order; categorical columns only keep code uniqueness.
* prefix free (bit granular, variable length): an order-preserving binary
  tree built by weighted bisection; codes are zero-padded to w_max bits.

Padded codes compare as big-endian integers.  For the byte-granular scheme
the padding is sound because the suffix of any code below a shared complete
prefix is never all zero, so a short code always orders below every longer
code it prefixes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .predicate import Op, Predicate, ResolvedPredicate

__all__ = [
    "ColumnKind",
    "FrequencyTable",
    "build_frequency_table",
    "CodeAssignment",
    "ppe_numerical",
    "ppe_categorical",
    "fixed_assignment",
    "prefix_free_assignment",
    "Dictionary",
    "compare_codes",
]

MAX_CODE_BYTES = 8
MAX_FIXED_BITS = 32


class ColumnKind(enum.Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"
    ORDERED_STRING = "ordered_string"

    @property
    def ordered(self) -> bool:
        return self is not ColumnKind.CATEGORICAL


@dataclass(frozen=True)
class FrequencyTable:
    """Distinct values and their occurrence counts, in dictionary order.

    Ordered kinds sort values ascending; categorical sorts by descending
    weight with ties broken by first appearance in the input.
    """

    values: np.ndarray
    weights: np.ndarray
    kind: ColumnKind

    def __post_init__(self):
        if len(self.values) == 0:
            raise ValueError("empty column")
        if len(self.values) != len(self.weights):
            raise ValueError("values and weights differ in length")

    @property
    def n(self) -> int:
        return len(self.values)


def _as_value_array(values, kind: ColumnKind) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("column must be a nonempty 1-d sequence")
    if arr.dtype == object:
        if any(v is None for v in arr):
            raise ValueError("NULL value in column")
    if kind is ColumnKind.NUMERIC:
        if arr.dtype.kind not in "iu":
            if arr.dtype != object or not all(
                isinstance(v, (int, np.integer)) and not isinstance(v, bool)
                for v in arr
            ):
                raise ValueError("numeric column holds a non-integer")
        arr = arr.astype(np.int64)
    else:
        arr = arr.astype(str)
        if (np.char.str_len(arr) == 0).any():
            raise ValueError("NULL (empty) value in string column")
    return arr


def build_frequency_table(values, kind: ColumnKind) -> FrequencyTable:
    """Count distinct values and order them for dictionary construction."""
    arr = _as_value_array(values, kind)
    if kind.ordered:
        uniq, counts = np.unique(arr, return_counts=True)
        return FrequencyTable(uniq, counts.astype(np.int64), kind)
    uniq, first, counts = np.unique(arr, return_index=True, return_counts=True)
    order = np.lexsort((first, -counts))
    return FrequencyTable(uniq[order], counts[order].astype(np.int64), kind)


# ---------------------------------------------------------------------------
# code assignments


@dataclass(frozen=True)
class CodeAssignment:
    """Parallel code/length arrays for the dictionary's values.

    lengths are bytes for the byte-granular schemes and bits for the
    prefix-free scheme; width_bits is the fixed width w, or the padded
    width w_max for prefix-free codes, and 0 for byte-granular schemes.
    """

    codes: np.ndarray
    lengths: np.ndarray
    scheme: str
    width_bits: int = 0

    @property
    def n(self) -> int:
        return len(self.codes)

    @property
    def max_len(self) -> int:
        return int(self.lengths.max())

    @property
    def bit_granular(self) -> bool:
        return self.scheme == "prefix_free"


def _byte_len(m: int) -> int:
    """Smallest beta with 256**beta >= m (0 for m <= 1)."""
    return ((m - 1).bit_length() + 7) // 8 if m > 1 else 0


def ppe_numerical(weights) -> CodeAssignment:
    """Order-preserving variable-length byte codes for an ascending domain.

    A 256-way tree is grown top-down: at each node the 255 most frequent
    values of the range take the node's slots (sub-codes 1..255 in value
    order) and the gaps between them descend through pointer sub-codes
    (0 for the range left of the first slot, t+1 between slots, 255 on the
    right).  Recursion stops once a range fits in one node or the prefix
    is 2 bytes deep; terminal ranges are enumerated with the fewest bytes
    that can hold them, offset by one so a suffix is never all zero.
    """
    w = np.ascontiguousarray(np.asarray(weights, dtype=np.int64))
    n = len(w)
    if n == 0:
        raise ValueError("empty weight table")
    if (w < 0).any():
        raise ValueError("negative weight")
    codes = np.zeros(n, dtype=np.uint64)
    lengths = np.zeros(n, dtype=np.uint8)
    stack = [(0, 0, n)]
    while stack:
        b, s, e = stack.pop()
        size = e - s
        if size < 256 or b >= 2:
            beta = _byte_len(size + 1)
            if size:
                codes[s:e] = (codes[s:e] << np.uint64(8 * beta)) + (
                    1 + np.arange(size, dtype=np.uint64)
                )
                lengths[s:e] = b + beta
            continue
        top = np.argsort(-w[s:e], kind="stable")[:255]
        slots = np.sort(top) + s
        codes[slots] = (codes[slots] << np.uint64(8)) + np.arange(
            1, 256, dtype=np.uint64
        )
        lengths[slots] = b + 1
        in_slot = np.zeros(size, dtype=bool)
        in_slot[slots - s] = True
        gaps = np.flatnonzero(~in_slot) + s
        if len(gaps):
            ptr = np.searchsorted(slots, gaps).astype(np.uint64)
            codes[gaps] = (codes[gaps] << np.uint64(8)) + ptr
        child_starts = np.concatenate(([s], slots + 1))
        child_ends = np.concatenate((slots, [e]))
        for cs, ce in zip(child_starts.tolist(), child_ends.tolist()):
            if ce > cs:
                stack.append((b + 1, cs, ce))
    return CodeAssignment(codes, lengths, "ppe_numerical")


def ppe_categorical(n: int) -> CodeAssignment:
    """Variable-length byte codes for values ranked by descending weight.

    The tree has depth B = ceil(log256(n+1)).  Levels above the last are
    filled densely (255 slots per node, every pointer path materialized);
    the remaining values are dealt round-robin across the last level's
    nodes, slot by slot, which spreads them as evenly as possible.
    """
    if n <= 0:
        raise ValueError("need at least one value")
    depth = max(_byte_len(n + 1), 1)
    parts_codes = []
    parts_lens = []
    filled = 0
    for b in range(1, depth):
        cap = 255 * 256 ** (b - 1)
        idx = np.arange(cap, dtype=np.uint64)
        node = idx // 255
        slot = idx % 255 + 1
        parts_codes.append((node << np.uint64(8)) + slot)
        parts_lens.append(np.full(cap, b, dtype=np.uint8))
        filled += cap
    rem = n - filled
    nodes_last = 256 ** (depth - 1)
    idx = np.arange(rem, dtype=np.uint64)
    slot = idx // nodes_last + 1
    node = idx % nodes_last
    parts_codes.append((node << np.uint64(8)) + slot)
    parts_lens.append(np.full(rem, depth, dtype=np.uint8))
    codes = np.concatenate(parts_codes)
    lengths = np.concatenate(parts_lens)
    return CodeAssignment(codes, lengths, "ppe_categorical")


def fixed_assignment(n: int) -> CodeAssignment:
    """Rank codes at the smallest shared bit width."""
    if n <= 0:
        raise ValueError("need at least one value")
    width = max(1, (n - 1).bit_length())
    if width > MAX_FIXED_BITS:
        raise ValueError("dictionary width overflow (more than 2**32 values)")
    codes = np.arange(n, dtype=np.uint64)
    lengths = np.full(n, (width + 7) // 8, dtype=np.uint8)
    return CodeAssignment(codes, lengths, "fixed", width_bits=width)


def prefix_free_assignment(weights) -> CodeAssignment:
    """Order-preserving binary prefix-free codes by weighted bisection.

    Each range splits where the heavier side's weight is smallest; the left
    child appends bit 0, the right bit 1.  Splits are clamped so no code
    exceeds ceil(log2(n)) + 4 bits, which bounds the padded plane count.
    """
    w = np.asarray(weights, dtype=np.float64)
    n = len(w)
    if n == 0:
        raise ValueError("empty weight table")
    codes = np.zeros(n, dtype=np.uint64)
    bits = np.zeros(n, dtype=np.uint8)
    if n == 1:
        bits[0] = 1
        return CodeAssignment(codes, bits, "prefix_free", width_bits=1)
    cap = (n - 1).bit_length() + 4
    prefix = np.concatenate(([0.0], np.cumsum(w)))
    stack = [(0, n, 0, 0)]
    while stack:
        s, e, code, depth = stack.pop()
        if e - s == 1:
            codes[s] = code
            bits[s] = depth
            continue
        budget = cap - depth
        half = 1 << (budget - 1)
        lo = max(s + 1, e - half)
        hi = min(e - 1, s + half)
        target = (prefix[s] + prefix[e]) / 2.0
        k = int(np.searchsorted(prefix, target, side="left"))
        k = min(max(k, lo), hi)
        best, best_cost = k, max(prefix[k] - prefix[s], prefix[e] - prefix[k])
        for cand in (k - 1, k + 1):
            if lo <= cand <= hi:
                cost = max(prefix[cand] - prefix[s], prefix[e] - prefix[cand])
                if cost < best_cost:
                    best, best_cost = cand, cost
        k = best
        stack.append((k, e, (code << 1) | 1, depth + 1))
        stack.append((s, k, code << 1, depth + 1))
    return CodeAssignment(codes, bits, "prefix_free", width_bits=int(bits.max()))


# ---------------------------------------------------------------------------
# scalar comparator


def compare_codes(code1: int, len1: int, code2: int, len2: int) -> tuple[int, int]:
    """Compare two variable-length byte codes as padded big-endian integers.

    Returns (sign, bytes_examined).  Walks bytes front to back and stops at
    the first difference; equal prefixes are settled by length because the
    longer code's remaining suffix is never all zero.  Never examines more
    than min(len1, len2) bytes.
    """
    shared = min(len1, len2)
    for m in range(1, shared + 1):
        b1 = (code1 >> (8 * (len1 - m))) & 0xFF
        b2 = (code2 >> (8 * (len2 - m))) & 0xFF
        if b1 != b2:
            return (1 if b1 > b2 else -1), m
    if len1 == len2:
        return 0, shared
    return (1 if len1 > len2 else -1), shared


# ---------------------------------------------------------------------------
# dictionary


class Dictionary:
    """Value table plus one code assignment, with literal resolution."""

    def __init__(self, table: FrequencyTable, assignment: CodeAssignment):
        if assignment.n != table.n:
            raise ValueError("assignment size does not match table")
        self.table = table
        self.assignment = assignment

    # construction ---------------------------------------------------------

    @classmethod
    def build(cls, table: FrequencyTable, scheme: str) -> "Dictionary":
        """scheme is one of fixed, prefix_preserving, prefix_free."""
        if scheme == "fixed":
            return cls(table, fixed_assignment(table.n))
        if scheme == "prefix_preserving":
            if table.kind.ordered:
                assignment = ppe_numerical(table.weights)
            else:
                assignment = ppe_categorical(table.n)
            if assignment.max_len > MAX_CODE_BYTES:
                raise ValueError("code length overflow")
            return cls(table, assignment)
        if scheme == "prefix_free":
            # categorical tables are in frequency order; only equality is
            # ever resolved against them, so order preservation is moot
            return cls(table, prefix_free_assignment(table.weights))
        raise ValueError(f"unknown scheme {scheme!r}")

    # basic accessors ------------------------------------------------------

    @property
    def kind(self) -> ColumnKind:
        return self.table.kind

    @property
    def n(self) -> int:
        return self.table.n

    @property
    def max_len(self) -> int:
        return self.assignment.max_len

    @cached_property
    def padded(self) -> np.ndarray:
        """Codes shifted so padding zeros occupy the low bits/bytes."""
        a = self.assignment
        if a.bit_granular:
            shift = a.width_bits - a.lengths.astype(np.uint64)
        else:
            shift = np.uint64(8) * (a.max_len - a.lengths.astype(np.uint64))
        return a.codes << shift

    @cached_property
    def _padded_order(self) -> tuple[np.ndarray, np.ndarray]:
        order = np.argsort(self.padded, kind="stable")
        return self.padded[order], order

    @cached_property
    def _rank_of_value(self) -> dict:
        return {v: i for i, v in enumerate(self.table.values.tolist())}

    # row encoding / decoding ----------------------------------------------

    def encode_rows(self, values) -> np.ndarray:
        """Map raw values to their dictionary ranks (int64)."""
        arr = _as_value_array(values, self.kind)
        uniq, inverse = np.unique(arr, return_inverse=True)
        if self.kind.ordered:
            pos = np.searchsorted(self.table.values, uniq)
            if (pos >= self.n).any() or not (self.table.values[pos] == uniq).all():
                raise KeyError("value missing from dictionary")
        else:
            lut = self._rank_of_value
            try:
                pos = np.fromiter(
                    (lut[v] for v in uniq.tolist()), dtype=np.int64, count=len(uniq)
                )
            except KeyError:
                raise KeyError("value missing from dictionary") from None
        return pos[inverse].astype(np.int64)

    def row_codes(self, ranks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Codes and lengths for the given ranks."""
        return self.assignment.codes[ranks], self.assignment.lengths[ranks]

    def decode_padded(self, padded_codes) -> np.ndarray:
        """Map padded codes back to values; unknown codes raise LookupError."""
        q = np.asarray(padded_codes, dtype=np.uint64)
        sorted_padded, order = self._padded_order
        pos = np.searchsorted(sorted_padded, q)
        bad = (pos >= self.n) | (sorted_padded[np.minimum(pos, self.n - 1)] != q)
        if bad.any():
            raise LookupError("padded code not in dictionary")
        return self.table.values[order[pos]]

    def decode_ranks(self, ranks) -> np.ndarray:
        return self.table.values[np.asarray(ranks, dtype=np.int64)]

    # literal resolution ----------------------------------------------------

    def _literal_value(self, value):
        if self.kind is ColumnKind.NUMERIC:
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise TypeError("numeric column needs an integer literal")
            return int(value)
        if not isinstance(value, str):
            raise TypeError("string column needs a string literal")
        return value

    def _code_at(self, rank: int) -> tuple[int, int]:
        a = self.assignment
        return int(a.codes[rank]), int(a.lengths[rank])

    def _resolve_one(self, op: Op, value) -> ResolvedPredicate:
        value = self._literal_value(value)
        vals = self.table.values
        if op in (Op.EQ, Op.NE):
            if self.kind.ordered:
                pos = int(np.searchsorted(vals, value))
                found = pos < self.n and vals[pos] == value
                rank = pos
            else:
                rank = self._rank_of_value.get(value, -1)
                found = rank >= 0
            if not found:
                return ResolvedPredicate.constant(op is Op.NE)
            return ResolvedPredicate.compare(op, *self._code_at(rank))
        if not self.kind.ordered:
            raise ValueError("range predicate on a categorical column")
        if op in (Op.LT, Op.LE):
            side = "left" if op is Op.LT else "right"
            cut = int(np.searchsorted(vals, value, side=side))
            if cut == 0:
                return ResolvedPredicate.constant(False)
            if cut == self.n:
                return ResolvedPredicate.constant(True)
            return ResolvedPredicate.compare(Op.LE, *self._code_at(cut - 1))
        if op in (Op.GT, Op.GE):
            side = "right" if op is Op.GT else "left"
            cut = int(np.searchsorted(vals, value, side=side))
            if cut == self.n:
                return ResolvedPredicate.constant(False)
            if cut == 0:
                return ResolvedPredicate.constant(True)
            return ResolvedPredicate.compare(Op.GE, *self._code_at(cut))
        raise ValueError(f"cannot resolve operator {op}")

    def encode_literal(self, pred: Predicate) -> ResolvedPredicate:
        """Translate a raw-value predicate into code space.

        Absent equality literals collapse to constants, range literals
        resolve through the nearest present value, and out-of-range
        literals collapse to constant true/false.
        """
        if pred.op is not Op.BETWEEN:
            return self._resolve_one(pred.op, pred.value)
        lo = self._resolve_one(Op.GE, pred.value)
        hi = self._resolve_one(Op.LE, pred.value_high)
        for side in (lo, hi):
            if side.is_trivial and not side.trivial:
                return ResolvedPredicate.constant(False)
        if lo.is_trivial and hi.is_trivial:
            return ResolvedPredicate.constant(True)
        if lo.is_trivial:
            return hi
        if hi.is_trivial:
            return lo
        return ResolvedPredicate.between(lo.code, lo.length, hi.code, hi.length)
