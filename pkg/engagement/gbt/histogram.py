"""
Gradient/hessian histograms.

A histogram holds, for every (feature, bin) pair, the sum of gradients, the sum of
hessians and the row count of the node's rows falling in that bin. All features are
accumulated in one pass by offsetting each feature's bin codes into its own block,
so results do not depend on any worker scheduling.
"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from engagement.exceptions import HistogramCheckException

# Subtracted and directly built histograms must agree to this tolerance, scaled by
# the largest absolute per-bin sum of the parent (at least 1).
SUBTRACTION_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Histogram:
    """Per-(feature, bin) sums, each of shape (n_features, n_bins)."""

    sum_gradients: NDArray[np.float64]
    sum_hessians: NDArray[np.float64]
    count: NDArray[np.int64]

    def __sub__(self, other: "Histogram") -> "Histogram":
        return Histogram(
            sum_gradients=self.sum_gradients - other.sum_gradients,
            sum_hessians=self.sum_hessians - other.sum_hessians,
            count=self.count - other.count,
        )

    def max_abs_difference(self, other: "Histogram") -> float:
        return float(
            max(
                np.max(np.abs(self.sum_gradients - other.sum_gradients), initial=0.0),
                np.max(np.abs(self.sum_hessians - other.sum_hessians), initial=0.0),
                np.max(np.abs(self.count - other.count), initial=0),
            )
        )


class HistogramBuilder:
    """
    Builds histograms for row subsets of one binned matrix.

    Args:
        codes: n x d bin indices
        n_bins: Width of every feature block (largest bin count over features)
    """

    def __init__(self, codes: NDArray[np.uint8], n_bins: int):
        self.n_rows, self.n_features = codes.shape
        self.n_bins = n_bins
        offsets = np.arange(self.n_features, dtype=np.intp) * n_bins
        self._flat_codes = codes.astype(np.intp) + offsets

    def build(
        self,
        rows: NDArray[np.intp],
        gradients: NDArray[np.float64],
        hessians: NDArray[np.float64],
    ) -> Histogram:
        """Direct construction from the rows of one node."""
        keys = self._flat_codes[rows].ravel()
        size = self.n_features * self.n_bins
        shape = (self.n_features, self.n_bins)
        node_g = np.repeat(gradients[rows], self.n_features)
        node_h = np.repeat(hessians[rows], self.n_features)
        return Histogram(
            sum_gradients=np.bincount(keys, weights=node_g, minlength=size).reshape(shape),
            sum_hessians=np.bincount(keys, weights=node_h, minlength=size).reshape(shape),
            count=np.bincount(keys, minlength=size).astype(np.int64).reshape(shape),
        )

    def build_by_subtraction(
        self,
        parent: Histogram,
        sibling: Histogram,
        rows: NDArray[np.intp],
        gradients: NDArray[np.float64],
        hessians: NDArray[np.float64],
        verify: bool = False,
    ) -> Histogram:
        """
        Child histogram as parent minus sibling.

        With ``verify`` the result is checked against direct construction.

        Raises:
            HistogramCheckException: If verification finds a disagreement
        """
        result = parent - sibling
        if verify:
            direct = self.build(rows, gradients, hessians)
            error = result.max_abs_difference(direct)
            scale = max(
                1.0,
                float(np.max(np.abs(parent.sum_gradients), initial=0.0)),
                float(np.max(np.abs(parent.sum_hessians), initial=0.0)),
            )
            if error > SUBTRACTION_TOLERANCE * scale:
                raise HistogramCheckException(error)
        return result
