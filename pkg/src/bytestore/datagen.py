"""Deterministic synthetic columns for the benchmark sweeps.

Values are drawn i.i.d. from a Zipf distribution over [0, 2^d):
P(rank k) is proportional to k^(-s), and rank k maps to value k-1, so
value 0 is always the most frequent.  s=0 degenerates to uniform.

Sampling is inverse-CDF over a precomputed cumulative table, driven by a
PCG64 generator so that a seed fully determines the output on every
platform (the generator name is recorded in store manifests).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["ZipfSpec", "zipf_pmf", "gen_zipf", "PRNG_NAME"]

PRNG_NAME = "pcg64"


@dataclass(frozen=True)
class ZipfSpec:
    s: float
    domain_bits: int
    n_rows: int
    seed: int = 0

    def __post_init__(self):
        if self.s < 0:
            raise ValueError("skew must be >= 0")
        if not 4 <= self.domain_bits <= 24:
            raise ValueError("domain_bits must be 4..24")
        if self.n_rows < 1:
            raise ValueError("n_rows must be positive")

    @property
    def domain(self) -> int:
        return 1 << self.domain_bits


def zipf_pmf(s: float, domain: int) -> np.ndarray:
    """P(value v) for v = 0..domain-1 (rank v+1)."""
    ranks = np.arange(1, domain + 1, dtype=np.float64)
    weights = ranks ** -s
    return weights / weights.sum()


def gen_zipf(spec: ZipfSpec) -> np.ndarray:
    """Deterministic value sequence for the spec, dtype int64."""
    cdf = np.cumsum(zipf_pmf(spec.s, spec.domain))
    cdf[-1] = 1.0
    rng = np.random.default_rng(spec.seed)
    u = rng.random(spec.n_rows)
    return np.searchsorted(cdf, u, side="right").astype(np.int64)
