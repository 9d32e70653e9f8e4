"""Predicate types shared by the dictionary resolver and the layout scans."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Op", "Predicate", "ResolvedPredicate", "LaneConfig", "DEFAULT_LANES"]


class Op(enum.Enum):
    EQ = "="
    NE = "!="
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="
    BETWEEN = "between"

    @classmethod
    def parse(cls, text: str) -> "Op":
        table = {
            "=": cls.EQ,
            "==": cls.EQ,
            "!=": cls.NE,
            "<>": cls.NE,
            "<": cls.LT,
            "<=": cls.LE,
            ">": cls.GT,
            ">=": cls.GE,
            "between": cls.BETWEEN,
        }
        try:
            return table[text.lower()]
        except KeyError:
            raise ValueError(f"unknown operator {text!r}") from None


@dataclass(frozen=True)
class Predicate:
    """Comparison against raw column values, before dictionary resolution."""

    column: str
    op: Op
    value: object
    value_high: object = None

    def __post_init__(self):
        if self.op is Op.BETWEEN:
            if self.value_high is None:
                raise ValueError("BETWEEN needs a low and a high literal")
            if not type(self.value) is type(self.value_high):
                raise ValueError("BETWEEN bounds must share a type")
            if self.value > self.value_high:
                raise ValueError("BETWEEN bounds out of order")
        elif self.value_high is not None:
            raise ValueError(f"{self.op.value} takes a single literal")


@dataclass(frozen=True)
class ResolvedPredicate:
    """Predicate mapped into code space, ready for a layout scan.

    Either trivial (constant truth value, slices never touched) or an
    operator over padded-comparable codes.  BETWEEN carries an inclusive
    code range [code, code2]; lengths are in bytes for byte-sliced layouts
    and in bits for bit-plane layouts.
    """

    op: Op | None
    code: int = 0
    length: int = 0
    code2: int = 0
    length2: int = 0
    trivial: bool | None = None

    @classmethod
    def constant(cls, value: bool) -> "ResolvedPredicate":
        return cls(op=None, trivial=value)

    @classmethod
    def compare(cls, op: Op, code: int, length: int) -> "ResolvedPredicate":
        if op is Op.BETWEEN:
            raise ValueError("BETWEEN needs two codes")
        return cls(op=op, code=code, length=length)

    @classmethod
    def between(cls, lo: int, lo_len: int, hi: int, hi_len: int) -> "ResolvedPredicate":
        return cls(op=Op.BETWEEN, code=lo, length=lo_len, code2=hi, length2=hi_len)

    @property
    def is_trivial(self) -> bool:
        return self.op is None


@dataclass(frozen=True)
class LaneConfig:
    """Width of one scan word: how many codes a block processes at a time."""

    lane_count: int = 32

    def __post_init__(self):
        n = self.lane_count
        if n < 8 or n > 64 or n & (n - 1):
            raise ValueError("lane_count must be a power of two in [8, 64]")

    @property
    def block_size(self) -> int:
        return self.lane_count

    @property
    def word_dtype(self):
        return {8: np.uint8, 16: np.uint16, 32: np.uint32, 64: np.uint64}[
            self.lane_count
        ]

    def n_blocks(self, n_rows: int) -> int:
        return (n_rows + self.lane_count - 1) // self.lane_count


DEFAULT_LANES = LaneConfig()
