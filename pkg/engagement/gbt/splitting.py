"""
Split finding on gradient/hessian histograms.

The gain of splitting parent P into (L, R) is

    0.5 * [G_L^2 / (H_L + l2) + G_R^2 / (H_R + l2) - G_P^2 / (H_P + l2)]

and the value of a leaf is -G / (H + l2). A split on (feature f, bin b) sends bins
<= b to the left child.
"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from engagement.gbt.histogram import Histogram

# Relative gain a split must exceed to be accepted
GAIN_TOLERANCE = 1e-12


@dataclass(frozen=True)
class NodeStats:
    """Gradient sum, hessian sum and row count of a node."""

    sum_gradients: float
    sum_hessians: float
    count: int


@dataclass(frozen=True)
class SplitInfo:
    """Best split of a node."""

    gain: float
    feature: int
    bin: int
    left: NodeStats
    right: NodeStats


def leaf_value(stats: NodeStats, l2_regularization: float) -> float:
    """Newton step for squared error: -G / (H + l2)."""
    return -stats.sum_gradients / (stats.sum_hessians + l2_regularization)


def split_gain(left: NodeStats, right: NodeStats, parent: NodeStats, l2: float) -> float:
    """Gain of one candidate split (scalar form of the vectorized search)."""

    def score(stats: NodeStats) -> float:
        return stats.sum_gradients**2 / (stats.sum_hessians + l2)

    return 0.5 * (score(left) + score(right) - score(parent))


def find_best_split(
    histogram: Histogram,
    parent: NodeStats,
    n_bins: NDArray[np.intp],
    min_samples_leaf: int,
    l2_regularization: float,
) -> SplitInfo | None:
    """
    Best (feature, bin) split of a node.

    Both children must hold at least ``min_samples_leaf`` rows. Ties go to the
    lowest feature index, then the lowest bin index.

    Args:
        histogram: Node histogram, shape (n_features, width)
        parent: Node totals
        n_bins: Bin count of each feature; bins at or past n_bins - 1 cannot split
        min_samples_leaf: Minimum rows per child
        l2_regularization: L2 penalty on leaf values

    Returns:
        SplitInfo | None: Best split, or None when no split gains more than
            GAIN_TOLERANCE relative to the parent score
    """
    left_g = np.cumsum(histogram.sum_gradients, axis=1)
    left_h = np.cumsum(histogram.sum_hessians, axis=1)
    left_n = np.cumsum(histogram.count, axis=1)
    right_g = parent.sum_gradients - left_g
    right_h = parent.sum_hessians - left_h
    right_n = parent.count - left_n

    width = histogram.count.shape[1]
    splittable_bin = np.arange(width)[None, :] < (n_bins[:, None] - 1)
    valid = splittable_bin & (left_n >= min_samples_leaf) & (right_n >= min_samples_leaf)
    if not valid.any():
        return None

    lam = l2_regularization
    parent_score = parent.sum_gradients**2 / (parent.sum_hessians + lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        gain = 0.5 * (left_g**2 / (left_h + lam) + right_g**2 / (right_h + lam) - parent_score)
    gain = np.where(valid & np.isfinite(gain), gain, -np.inf)

    # argmax returns the first maximum in row-major order: lowest feature, then bin
    best = int(np.argmax(gain))
    best_gain = float(gain.flat[best])
    # gains within roundoff of the parent score come from cancellation, not structure
    if not best_gain > GAIN_TOLERANCE * max(1.0, abs(parent_score)):
        return None

    feature, bin_index = divmod(best, width)
    return SplitInfo(
        gain=best_gain,
        feature=feature,
        bin=bin_index,
        left=NodeStats(
            float(left_g[feature, bin_index]),
            float(left_h[feature, bin_index]),
            int(left_n[feature, bin_index]),
        ),
        right=NodeStats(
            float(right_g[feature, bin_index]),
            float(right_h[feature, bin_index]),
            int(right_n[feature, bin_index]),
        ),
    )
