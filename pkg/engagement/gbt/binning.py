"""
Feature discretization for the histogram engine.

Each feature gets an ascending list of at most ``max_bins - 1`` thresholds. A value
``v`` falls in bin ``i`` iff ``thresholds[i-1] < v <= thresholds[i]``; values above
the last threshold fall in the last bin, including values never seen during fitting.
"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from engagement.config.settings import settings
from engagement.exceptions import DimensionMismatchException, EmptyInputException

BIN_DTYPE = np.uint8


@dataclass(frozen=True)
class BinMapper:
    """Per-feature ascending bin thresholds."""

    thresholds: tuple[NDArray[np.float64], ...]

    @property
    def n_features(self) -> int:
        return len(self.thresholds)

    @property
    def n_bins(self) -> NDArray[np.intp]:
        """Number of bins per feature (thresholds + 1)."""
        return np.array([t.size + 1 for t in self.thresholds], dtype=np.intp)

    @property
    def max_n_bins(self) -> int:
        return int(self.n_bins.max()) if self.thresholds else 1


@dataclass(frozen=True)
class BinnedMatrix:
    """n x d bin indices produced by a BinMapper."""

    codes: NDArray[np.uint8]
    mapper: BinMapper

    @property
    def n_rows(self) -> int:
        return int(self.codes.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.codes.shape[1])


def _feature_thresholds(column: NDArray[np.float64], max_bins: int) -> NDArray[np.float64]:
    distinct = np.unique(column)
    if distinct.size <= max_bins:
        # one bin per distinct value
        midpoints = distinct[:-1] + distinct[1:]
        midpoints *= 0.5
    else:
        percentiles = np.linspace(0, 100, num=max_bins + 1)[1:-1]
        midpoints = np.percentile(column, percentiles, method="midpoint")
    return np.unique(midpoints).astype(np.float64)


def fit_bins(
    X: ArrayLike,
    max_bins: int = 255,
    seed: int = 0,
    subsample: int | None = None,
) -> BinMapper:
    """
    Fit per-feature bin thresholds.

    Features with at most ``max_bins`` distinct values get exact binning (thresholds
    at midpoints between consecutive distinct values). Other features use midpoints
    of evenly spaced quantiles, computed on a seeded uniform subsample of at most
    ``subsample`` rows.

    Args:
        X: n x d finite matrix
        max_bins: Maximum number of bins per feature (2..255)
        seed: Subsampling seed
        subsample: Row cap for quantile fitting (defaults to settings.BIN_SUBSAMPLE)

    Returns:
        BinMapper: Fitted thresholds

    Raises:
        EmptyInputException: If X has no rows
    """
    matrix = np.asarray(X, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] == 0:
        raise EmptyInputException("fit_bins")
    cap = subsample or settings.BIN_SUBSAMPLE
    if matrix.shape[0] > cap:
        rows = np.random.default_rng(seed).choice(matrix.shape[0], size=cap, replace=False)
        matrix = matrix[np.sort(rows)]
    return BinMapper(
        thresholds=tuple(
            _feature_thresholds(matrix[:, j], max_bins) for j in range(matrix.shape[1])
        )
    )


def apply_bins(X: ArrayLike, mapper: BinMapper) -> BinnedMatrix:
    """
    Map raw values to bin indices by binary search.

    Raises:
        DimensionMismatchException: If the column count differs from the mapper
    """
    matrix = np.asarray(X, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[1] != mapper.n_features:
        raise DimensionMismatchException(mapper.n_features, matrix.shape, "X columns")
    codes = np.empty(matrix.shape, dtype=BIN_DTYPE)
    for j, thresholds in enumerate(mapper.thresholds):
        codes[:, j] = np.searchsorted(thresholds, matrix[:, j], side="left")
    return BinnedMatrix(codes=codes, mapper=mapper)
