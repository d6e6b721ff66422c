"""Median-centered trimmed mean for batches of vectors.

Given k vectors, the estimator takes the coordinate-wise median, keeps the
(1 - alpha) * k entries nearest the median in each coordinate, and averages
them. With at least (1 - alpha) * k well-clustered inputs the estimate stays
within ``trim_error_constant(alpha, dim) * r`` of their mean, where r is the
cluster's per-coordinate radius, no matter what the remaining entries are.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INTEGRALITY_TOL = 1e-9


def trim_count(alpha: float, count: int) -> int:
    """Number of entries trimmed, alpha * count, which must be integral."""
    raw = alpha * count
    trimmed = int(round(raw))
    if abs(raw - trimmed) > INTEGRALITY_TOL * max(1, count):
        raise ValueError(f"alpha * count = {raw} is not an integer (alpha={alpha}, count={count})")
    return trimmed


@dataclass(frozen=True)
class RobustMeanConfig:
    """Trimming parameters: fraction ``alpha`` in [0, 1/2) of ``count`` inputs."""

    alpha: float
    count: int

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValueError(f"count must be >= 1, got {self.count}")
        if not 0.0 <= self.alpha < 0.5:
            raise ValueError(f"alpha must be in [0, 0.5), got {self.alpha}")
        kept = self.count - trim_count(self.alpha, self.count)
        if kept < 1:
            raise ValueError(f"(1 - alpha) * count = {kept} leaves no entries")

    @property
    def kept(self) -> int:
        return self.count - trim_count(self.alpha, self.count)


def as_batch(vectors) -> np.ndarray:
    """Validate and return a (k, d) float64 batch of equal-length vectors."""
    arr = np.asarray(vectors, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected a non-empty batch of vectors, got shape {arr.shape}")
    return arr


def coordinate_median(vectors) -> np.ndarray:
    """Coordinate-wise median; for an even count, the mean of the two middle values."""
    return np.median(as_batch(vectors), axis=0)


def trimmed_mean(values: np.ndarray, kept: int) -> np.ndarray:
    """Mean of the ``kept`` entries nearest the median, per coordinate.

    ``values`` has shape (..., k, d); trimming runs over axis -2 independently
    for every coordinate. Ties at the cut radius are resolved toward the
    smaller index along axis -2 (exact float comparison, no tolerance).
    """
    k = values.shape[-2]
    if not 1 <= kept <= k:
        raise ValueError(f"kept must be in [1, {k}], got {kept}")
    if kept == k:
        return values.mean(axis=-2)
    mid = k // 2
    if k % 2:
        med = np.partition(values, mid, axis=-2)[..., mid : mid + 1, :]
    else:
        part = np.partition(values, (mid - 1, mid), axis=-2)
        med = 0.5 * (part[..., mid - 1 : mid, :] + part[..., mid : mid + 1, :])
    dist = np.abs(values - med)
    radius = np.partition(dist, kept - 1, axis=-2)[..., kept - 1 : kept, :]
    inside = dist < radius
    at_edge = dist == radius
    # fill remaining slots from edge ties in index order
    need = kept - inside.sum(axis=-2, keepdims=True)
    rank = np.cumsum(at_edge, axis=-2)
    mask = inside | (at_edge & (rank <= need))
    return (values * mask).sum(axis=-2) / kept


def robust_mean(vectors, cfg: RobustMeanConfig) -> np.ndarray:
    """The trimmed-mean estimate for a batch under ``cfg``."""
    batch = as_batch(vectors)
    if batch.shape[0] != cfg.count:
        raise ValueError(f"batch has {batch.shape[0]} vectors but cfg.count = {cfg.count}")
    return trimmed_mean(batch, cfg.kept)


def trim_error_constant(alpha: float, dim: int) -> float:
    """Worst-case estimate error per unit cluster radius, scaled by sqrt(dim).

    Equals (2a/(1-a)) * (1 + sqrt((1-a)^2 / (1-2a))) * sqrt(dim) for trim
    fraction a. Diverges as a -> 1/2, hence the open domain.
    """
    if not 0.0 <= alpha < 0.5:
        raise ValueError(f"alpha must be in [0, 0.5), got {alpha}")
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if alpha == 0.0:
        return 0.0
    one = 1.0 - alpha
    return (2.0 * alpha / one) * (1.0 + math.sqrt(one * one / (1.0 - 2.0 * alpha))) * math.sqrt(dim)
