"""
Leaf-wise tree growth.

The grower keeps a frontier of splittable leaves in a max-heap keyed by split gain
and repeatedly splits the best one until the leaf budget is spent or no leaf has a
positive-gain split. The smaller child's histogram is built from its rows and the
larger child's is obtained by subtraction from the parent.
"""

import heapq
import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from engagement.config.settings import settings
from engagement.exceptions import LengthMismatchException
from engagement.gbt.binning import BinnedMatrix
from engagement.gbt.histogram import Histogram, HistogramBuilder
from engagement.gbt.splitting import NodeStats, SplitInfo, find_best_split, leaf_value
from engagement.gbt.tree import LEAF, Tree
from engagement.schemas.params import GbtParams

logger = logging.getLogger(__name__)


@dataclass
class _GrowingNode:
    node_id: int
    rows: NDArray[np.intp]
    stats: NodeStats
    histogram: Histogram | None = None
    split: SplitInfo | None = None


@dataclass
class _NodeArrays:
    feature: list[int] = field(default_factory=list)
    bin: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    value: list[float] = field(default_factory=list)

    def add_leaf(self, value: float = 0.0) -> int:
        self.feature.append(LEAF)
        self.bin.append(0)
        self.threshold.append(float("nan"))
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(value)
        return len(self.feature) - 1

    def to_tree(self) -> Tree:
        return Tree(
            feature=np.array(self.feature, dtype=np.int32),
            bin=np.array(self.bin, dtype=np.int32),
            threshold=np.array(self.threshold, dtype=np.float64),
            left=np.array(self.left, dtype=np.int32),
            right=np.array(self.right, dtype=np.int32),
            value=np.array(self.value, dtype=np.float64),
        )


class TreeGrower:
    """
    Grows one regression tree on binned data.

    Args:
        binned: Binned training matrix
        gradients: Per-row gradients
        hessians: Per-row hessians
        params: Tree-shape parameters (max_leaf_nodes, min_samples_leaf, l2_regularization)
        verify_histograms: Cross-check every subtracted histogram against direct construction
    """

    def __init__(
        self,
        binned: BinnedMatrix,
        gradients: NDArray[np.float64],
        hessians: NDArray[np.float64],
        params: GbtParams,
        verify_histograms: bool | None = None,
    ):
        if gradients.shape[0] != binned.n_rows or hessians.shape[0] != binned.n_rows:
            raise LengthMismatchException(binned.n_rows, gradients.shape[0])
        self.binned = binned
        self.gradients = gradients
        self.hessians = hessians
        self.params = params
        self.verify_histograms = settings.DEBUG if verify_histograms is None else verify_histograms
        self.n_bins = binned.mapper.n_bins
        self.histograms = HistogramBuilder(binned.codes, binned.mapper.max_n_bins)
        self._nodes = _NodeArrays()
        self._heap: list[tuple[float, int, _GrowingNode]] = []
        self._leaves: list[_GrowingNode] = []

    def _stats(self, rows: NDArray[np.intp]) -> NodeStats:
        return NodeStats(
            sum_gradients=float(np.sum(self.gradients[rows])),
            sum_hessians=float(np.sum(self.hessians[rows])),
            count=int(rows.size),
        )

    def _consider(self, node: _GrowingNode) -> None:
        """Find the node's best split and push it on the frontier, or retire it as a leaf."""
        min_leaf = self.params.min_samples_leaf
        if node.stats.count >= 2 * min_leaf and node.histogram is not None:
            node.split = find_best_split(
                node.histogram,
                node.stats,
                self.n_bins,
                min_leaf,
                self.params.l2_regularization,
            )
        if node.split is None:
            node.histogram = None
            self._leaves.append(node)
            return
        heapq.heappush(self._heap, (-node.split.gain, node.node_id, node))

    def _split(self, node: _GrowingNode) -> tuple[_GrowingNode, _GrowingNode]:
        split = node.split
        if split is None or node.histogram is None:
            raise RuntimeError(f"Node {node.node_id} has no pending split")
        codes = self.binned.codes
        goes_left = codes[node.rows, split.feature] <= split.bin
        left_rows = node.rows[goes_left]
        right_rows = node.rows[~goes_left]

        left_id = self._nodes.add_leaf()
        right_id = self._nodes.add_leaf()
        thresholds = self.binned.mapper.thresholds[split.feature]
        self._nodes.feature[node.node_id] = split.feature
        self._nodes.bin[node.node_id] = split.bin
        self._nodes.threshold[node.node_id] = float(thresholds[split.bin])
        self._nodes.left[node.node_id] = left_id
        self._nodes.right[node.node_id] = right_id

        left = _GrowingNode(left_id, left_rows, self._stats(left_rows))
        right = _GrowingNode(right_id, right_rows, self._stats(right_rows))
        small, large = (left, right) if left_rows.size <= right_rows.size else (right, left)
        small.histogram = self.histograms.build(small.rows, self.gradients, self.hessians)
        large.histogram = self.histograms.build_by_subtraction(
            node.histogram,
            small.histogram,
            large.rows,
            self.gradients,
            self.hessians,
            verify=self.verify_histograms,
        )
        node.histogram = None
        return left, right

    def grow(self) -> tuple[Tree, NDArray[np.float64]]:
        """
        Grow the tree.

        Returns:
            tuple[Tree, NDArray]: The tree and each training row's leaf value
        """
        all_rows = np.arange(self.binned.n_rows, dtype=np.intp)
        root = _GrowingNode(self._nodes.add_leaf(), all_rows, self._stats(all_rows))
        root.histogram = self.histograms.build(all_rows, self.gradients, self.hessians)
        self._consider(root)

        n_leaves = 1
        while self._heap and n_leaves < self.params.max_leaf_nodes:
            _, _, node = heapq.heappop(self._heap)
            left, right = self._split(node)
            n_leaves += 1
            self._consider(left)
            self._consider(right)

        # frontier nodes left unsplit when the leaf budget ran out
        while self._heap:
            _, _, node = heapq.heappop(self._heap)
            node.histogram = None
            self._leaves.append(node)

        row_values = np.empty(self.binned.n_rows, dtype=np.float64)
        lam = self.params.l2_regularization
        for leaf in self._leaves:
            value = leaf_value(leaf.stats, lam)
            self._nodes.value[leaf.node_id] = value
            row_values[leaf.rows] = value

        return self._nodes.to_tree(), row_values


def grow_tree(
    binned: BinnedMatrix,
    gradients: NDArray[np.float64],
    hessians: NDArray[np.float64],
    params: GbtParams,
    verify_histograms: bool | None = None,
) -> Tree:
    """Grow one tree; see TreeGrower."""
    tree, _ = TreeGrower(binned, gradients, hessians, params, verify_histograms).grow()
    return tree
