"""Gaussian fields with Green-matrix covariance, and their squared transforms.

Samples are drawn by Cholesky factorization of the covariance, so a batch is
a deterministic function of (seed, stream) regardless of worker count; the
factor is computed once and shared read-only across blocks.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .graph import WeightedWindow
from .potential import GreenMatrix
from .rng import block_counts, block_generator, map_blocks

#: Base diagonal jitter, scaled by trace/dim, applied when factorization fails.
JITTER_BASE = 1e-12

#: Number of escalating retries (each multiplies the jitter by 10).
JITTER_RETRIES = 3


class CovarianceError(Exception):
    """Covariance not positive semi-definite even after maximal jitter."""


def covariance_hash(values: np.ndarray) -> str:
    """Stable hex digest of a covariance matrix's exact float contents."""
    h = hashlib.sha256()
    h.update(str(values.shape).encode())
    h.update(np.ascontiguousarray(values, dtype=np.float64).tobytes())
    return h.hexdigest()[:16]


def cholesky_with_jitter(values: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor, adding escalating diagonal jitter on failure.

    Returns the factor and the jitter actually used (0.0 on a clean
    factorization).  The starting jitter is ``JITTER_BASE * trace/dim`` and
    escalates tenfold per retry; running out of retries raises
    :class:`CovarianceError`.
    """
    values = np.asarray(values, dtype=np.float64)
    jitter = 0.0
    scale = float(np.trace(values)) / values.shape[0]
    for attempt in range(JITTER_RETRIES + 1):
        try:
            factor = np.linalg.cholesky(values + jitter * np.eye(values.shape[0]))
            return factor, jitter
        except np.linalg.LinAlgError:
            jitter = JITTER_BASE * scale * 10**attempt
    raise CovarianceError(
        f"covariance not PSD: Cholesky failed after jitter {jitter / 10:.3e}"
    )


@dataclass(frozen=True)
class GaussianSampleBatch:
    """Matrix of independent Gaussian field draws, one row per sample."""

    window: WeightedWindow
    samples: np.ndarray
    seed_record: dict
    covariance_hash: str
    jitter: float = 0.0

    @property
    def count(self) -> int:
        return self.samples.shape[0]

    def validate(self) -> None:
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("non-finite field values in batch")


def sample_gff(
    green: GreenMatrix,
    count: int,
    seed: int,
    stream: int = 0,
    workers: int = 1,
) -> GaussianSampleBatch:
    """Draw centered Gaussian vectors with the given Green matrix covariance.

    Blocks of samples are generated from counter-offset generators keyed by
    (seed, stream), so output is byte-identical at any worker count.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    factor, jitter = cholesky_with_jitter(green.values)
    n = green.values.shape[0]
    counts = block_counts(count)
    offsets = np.concatenate([[0], np.cumsum(counts)])
    out = np.empty((count, n))

    def fill(block: int, block_count: int):
        gen = block_generator(seed, stream, block)
        z = gen.standard_normal((block_count, n))
        out[offsets[block] : offsets[block] + block_count] = z @ factor.T

    map_blocks(fill, count, workers=workers)
    return GaussianSampleBatch(
        window=green.window,
        samples=out,
        seed_record={"seed": int(seed), "stream": int(stream)},
        covariance_hash=covariance_hash(green.values),
        jitter=jitter,
    )


def shifted_square_field(batch: GaussianSampleBatch, shift: float) -> np.ndarray:
    """Entrywise half-square of the shifted field: rows of (field + shift)^2 / 2."""
    return 0.5 * (batch.samples + float(shift)) ** 2
