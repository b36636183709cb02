"""Histogram gradient boosting engine."""

from engagement.gbt.binning import BinMapper, BinnedMatrix, apply_bins, fit_bins
from engagement.gbt.booster import GbtModel, fit, predict
from engagement.gbt.grower import TreeGrower, grow_tree
from engagement.gbt.histogram import Histogram, HistogramBuilder
from engagement.gbt.splitting import NodeStats, SplitInfo, find_best_split, leaf_value
from engagement.gbt.tree import LEAF, Tree

__all__ = [
    "LEAF",
    "BinMapper",
    "BinnedMatrix",
    "GbtModel",
    "Histogram",
    "HistogramBuilder",
    "NodeStats",
    "SplitInfo",
    "Tree",
    "TreeGrower",
    "apply_bins",
    "find_best_split",
    "fit",
    "fit_bins",
    "grow_tree",
    "leaf_value",
    "predict",
]
