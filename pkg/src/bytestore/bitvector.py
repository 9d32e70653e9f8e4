"""Packed result bitvectors produced by scans and consumed by lookups.

Bit order is LSB-first throughout: bit i of the vector lives at bit
(i mod 32) of 32-bit word i // 32.  Bits at positions >= n_rows are kept
zero so word-level AND/OR/popcount never see garbage lanes.
"""

from __future__ import annotations

import numpy as np

__all__ = ["ResultBitVector", "bitvector_and", "bitvector_or", "popcount_vector"]


def _n_words(n_rows: int) -> int:
    return (n_rows + 31) // 32


class ResultBitVector:
    """Fixed-length bit sequence over the rows of one column."""

    __slots__ = ("n_rows", "words")

    def __init__(self, n_rows: int, words: np.ndarray):
        if n_rows < 0:
            raise ValueError("n_rows must be nonnegative")
        words = np.ascontiguousarray(words, dtype=np.uint32)
        if words.shape != (_n_words(n_rows),):
            raise ValueError("word count does not match row count")
        self.n_rows = n_rows
        self.words = words
        self._clear_tail()

    def _clear_tail(self) -> None:
        tail = self.n_rows % 32
        if tail and len(self.words):
            self.words[-1] &= np.uint32((1 << tail) - 1)

    # constructors ---------------------------------------------------------

    @classmethod
    def zeros(cls, n_rows: int) -> "ResultBitVector":
        return cls(n_rows, np.zeros(_n_words(n_rows), dtype=np.uint32))

    @classmethod
    def ones(cls, n_rows: int) -> "ResultBitVector":
        words = np.full(_n_words(n_rows), 0xFFFFFFFF, dtype=np.uint32)
        return cls(n_rows, words)

    @classmethod
    def from_bools(cls, flags) -> "ResultBitVector":
        flags = np.asarray(flags, dtype=bool)
        n = len(flags)
        packed = np.packbits(flags, bitorder="little")
        buf = np.zeros(_n_words(n) * 4, dtype=np.uint8)
        buf[: len(packed)] = packed
        return cls(n, buf.view(np.uint32))

    @classmethod
    def from_indices(cls, n_rows: int, indices) -> "ResultBitVector":
        flags = np.zeros(n_rows, dtype=bool)
        flags[np.asarray(indices, dtype=np.int64)] = True
        return cls.from_bools(flags)

    # accessors ------------------------------------------------------------

    def to_bools(self) -> np.ndarray:
        bits = np.unpackbits(self.words.view(np.uint8), bitorder="little")
        return bits[: self.n_rows].astype(bool)

    def to_indices(self) -> np.ndarray:
        return np.flatnonzero(self.to_bools()).astype(np.int64)

    def count(self) -> int:
        return int(np.bitwise_count(self.words).sum())

    def get(self, i: int) -> bool:
        if not 0 <= i < self.n_rows:
            raise IndexError(i)
        return bool((int(self.words[i >> 5]) >> (i & 31)) & 1)

    # combinators ----------------------------------------------------------

    def _check(self, other: "ResultBitVector") -> None:
        if self.n_rows != other.n_rows:
            raise ValueError("bitvector lengths differ")

    def __and__(self, other: "ResultBitVector") -> "ResultBitVector":
        self._check(other)
        return ResultBitVector(self.n_rows, self.words & other.words)

    def __or__(self, other: "ResultBitVector") -> "ResultBitVector":
        self._check(other)
        return ResultBitVector(self.n_rows, self.words | other.words)

    def __invert__(self) -> "ResultBitVector":
        return ResultBitVector(self.n_rows, ~self.words)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ResultBitVector):
            return NotImplemented
        return self.n_rows == other.n_rows and bool(
            np.array_equal(self.words, other.words)
        )

    def __hash__(self):
        raise TypeError("ResultBitVector is mutable, not hashable")

    def __len__(self) -> int:
        return self.n_rows

    def __repr__(self) -> str:
        return f"ResultBitVector(n_rows={self.n_rows}, set={self.count()})"


def bitvector_and(a: ResultBitVector, b: ResultBitVector) -> ResultBitVector:
    return a & b


def bitvector_or(a: ResultBitVector, b: ResultBitVector) -> ResultBitVector:
    return a | b


def popcount_vector(v: ResultBitVector) -> int:
    return v.count()
