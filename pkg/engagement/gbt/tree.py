"""
Fitted regression tree in flat array form.

Node ``i`` is a leaf when ``feature[i] == -1``; otherwise rows whose bin index on
``feature[i]`` is ``<= bin[i]`` go to ``left[i]`` and the rest to ``right[i]``.
``threshold[i]`` is the raw-value equivalent of ``bin[i]`` (NaN for leaves).
"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

LEAF = -1


@dataclass(frozen=True)
class Tree:
    feature: NDArray[np.int32]
    bin: NDArray[np.int32]
    threshold: NDArray[np.float64]
    left: NDArray[np.int32]
    right: NDArray[np.int32]
    value: NDArray[np.float64]

    @property
    def n_nodes(self) -> int:
        return int(self.feature.size)

    @property
    def is_leaf(self) -> NDArray[np.bool_]:
        return self.feature == LEAF

    @property
    def n_leaves(self) -> int:
        return int(self.is_leaf.sum())

    def apply(self, codes: NDArray[np.uint8]) -> NDArray[np.intp]:
        """Index of the leaf reached by each row of binned data."""
        node = np.zeros(codes.shape[0], dtype=np.intp)
        is_leaf = self.is_leaf
        active = np.flatnonzero(~is_leaf[node])
        while active.size:
            current = node[active]
            go_left = codes[active, self.feature[current]] <= self.bin[current]
            node[active] = np.where(go_left, self.left[current], self.right[current])
            active = active[~is_leaf[node[active]]]
        return node

    def predict_binned(self, codes: NDArray[np.uint8]) -> NDArray[np.float64]:
        """Leaf value of each row of binned data."""
        return self.value[self.apply(codes)]
