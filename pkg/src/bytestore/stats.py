"""Memory-access accounting emitted by scans and lookups.

Counts reflect the access pattern of the block-at-a-time algorithms: a
level is charged only for blocks that were still undecided when it began,
so early stopping is directly observable.  They also serve as the
deterministic cost model for the layout advisor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["ScanStats", "LookupStats"]


@dataclass
class ScanStats:
    """Per-level load counts for one scan (levels are slices or planes)."""

    levels: int
    blocks_total: int = 0
    blocks_skipped: int = 0
    words_loaded: np.ndarray = field(default=None)
    bytes_loaded: np.ndarray = field(default=None)
    mask_bytes: int = 0
    block_depth: np.ndarray | None = None

    def __post_init__(self):
        if self.words_loaded is None:
            self.words_loaded = np.zeros(self.levels, dtype=np.int64)
        if self.bytes_loaded is None:
            self.bytes_loaded = np.zeros(self.levels, dtype=np.int64)

    @property
    def total_bytes(self) -> int:
        """Slice/plane bytes plus mask bytes: the scan's cost-model value."""
        return int(self.bytes_loaded.sum()) + self.mask_bytes

    def depth_histogram(self) -> np.ndarray:
        """Blocks indexed by deepest level loaded (0 = nothing loaded)."""
        if self.block_depth is None:
            raise ValueError("scan did not record per-block depth")
        return np.bincount(self.block_depth, minlength=self.levels + 1)

    def merge(self, other: "ScanStats") -> "ScanStats":
        """Combine a pipelined pair of scans over the same blocks."""
        levels = max(self.levels, other.levels)
        words = np.zeros(levels, dtype=np.int64)
        words[: self.levels] += self.words_loaded
        words[: other.levels] += other.words_loaded
        nbytes = np.zeros(levels, dtype=np.int64)
        nbytes[: self.levels] += self.bytes_loaded
        nbytes[: other.levels] += other.bytes_loaded
        depth = None
        if self.block_depth is not None and other.block_depth is not None:
            depth = np.maximum(self.block_depth, other.block_depth)
        return ScanStats(
            levels=levels,
            blocks_total=self.blocks_total,
            blocks_skipped=min(self.blocks_skipped, other.blocks_skipped),
            words_loaded=words,
            bytes_loaded=nbytes,
            mask_bytes=self.mask_bytes + other.mask_bytes,
            block_depth=depth,
        )

    def concat(self, other: "ScanStats") -> "ScanStats":
        """Combine scans over disjoint block ranges (threaded partitions)."""
        if self.levels != other.levels:
            raise ValueError("level counts differ")
        depth = None
        if self.block_depth is not None and other.block_depth is not None:
            depth = np.concatenate([self.block_depth, other.block_depth])
        return ScanStats(
            levels=self.levels,
            blocks_total=self.blocks_total + other.blocks_total,
            blocks_skipped=self.blocks_skipped + other.blocks_skipped,
            words_loaded=self.words_loaded + other.words_loaded,
            bytes_loaded=self.bytes_loaded + other.bytes_loaded,
            mask_bytes=self.mask_bytes + other.mask_bytes,
            block_depth=depth,
        )


@dataclass
class LookupStats:
    """Access counts for one batched point lookup."""

    levels_touched: int = 0
    bytes_loaded: int = 0
    mask_bytes: int = 0

    @property
    def total_bytes(self) -> int:
        return self.bytes_loaded + self.mask_bytes
