"""
Histogram gradient boosting regressor with squared-error loss.

    prediction(x) = baseline + learning_rate * sum_t tree_t(x)

The baseline is the mean training target. Each iteration fits one tree to the
gradients ``pred - y`` (hessians are 1). With early stopping, a seeded share of the
rows is held out and boosting stops once the validation loss has not improved by
more than ``tol`` for ``n_iter_no_change`` iterations; the prefix of trees with the
lowest validation loss is kept (earliest on ties).
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from engagement.exceptions import (
    DimensionMismatchException,
    InvalidDomainException,
    LengthMismatchException,
    NonFiniteTargetException,
    TooFewRowsException,
)
from engagement.gbt.binning import BinMapper, apply_bins, fit_bins
from engagement.gbt.grower import TreeGrower
from engagement.gbt.tree import Tree
from engagement.schemas.params import GbtParams

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GbtModel:
    """
    Fitted ensemble for one target.

    ``train_loss_curve[k]`` is the mean squared error on the training rows after
    ``k`` trees (entry 0 is the baseline alone).
    """

    baseline: float
    trees: tuple[Tree, ...]
    learning_rate: float
    bin_mapper: BinMapper
    train_loss_curve: tuple[float, ...] = ()
    validation_loss_curve: tuple[float, ...] = ()
    stopped_early_at: int | None = None

    @property
    def n_iter(self) -> int:
        return len(self.trees)

    @property
    def n_features(self) -> int:
        return self.bin_mapper.n_features

    def predict(self, X: ArrayLike) -> NDArray[np.float64]:
        return predict(self, X)


def _mse(raw: NDArray[np.float64], y: NDArray[np.float64]) -> float:
    return float(np.mean((raw - y) ** 2))


def _baseline(y: NDArray[np.float64]) -> float:
    # exact for constant targets so every gradient is exactly zero
    if np.all(y == y[0]):
        return float(y[0])
    return float(np.mean(y))


def _validation_split(
    n_rows: int, params: GbtParams
) -> tuple[NDArray[np.intp], NDArray[np.intp] | None]:
    all_rows = np.arange(n_rows, dtype=np.intp)
    if not params.early_stopping:
        return all_rows, None
    required = math.ceil(1.0 / params.validation_fraction)
    n_validation = math.ceil(params.validation_fraction * n_rows)
    if n_rows < required or n_rows - n_validation < 1:
        raise TooFewRowsException(n_rows, max(required, n_validation + 1))
    permutation = np.random.default_rng(params.seed).permutation(n_rows)
    return np.sort(permutation[n_validation:]), np.sort(permutation[:n_validation])


def fit(X: ArrayLike, y: ArrayLike, params: GbtParams | None = None) -> GbtModel:
    """
    Fit a boosted ensemble.

    Args:
        X: n x d finite feature matrix
        y: n finite targets
        params: Hyperparameters

    Returns:
        GbtModel: Fitted model

    Raises:
        TooFewRowsException: Fewer than 2 rows, or too few for the validation split
        NonFiniteTargetException: y contains NaN or infinity
        LengthMismatchException: len(y) != rows(X)
    """
    params = params or GbtParams()
    features = np.asarray(X, dtype=np.float64)
    target = np.asarray(y, dtype=np.float64).ravel()
    if features.ndim != 2:
        raise DimensionMismatchException(2, features.ndim, "X dimensions")
    n_rows = features.shape[0]
    if target.shape[0] != n_rows:
        raise LengthMismatchException(n_rows, target.shape[0])
    if n_rows < 2:
        raise TooFewRowsException(n_rows, 2)
    n_bad = int((~np.isfinite(target)).sum())
    if n_bad:
        raise NonFiniteTargetException(n_bad)
    if not np.all(np.isfinite(features)):
        raise InvalidDomainException("fit.X", "non-finite feature value")

    train_rows, validation_rows = _validation_split(n_rows, params)
    X_train, y_train = features[train_rows], target[train_rows]

    mapper = fit_bins(X_train, params.max_bins, seed=params.seed)
    binned = apply_bins(X_train, mapper)
    baseline = _baseline(y_train)
    lr = params.learning_rate

    raw = np.full(y_train.shape[0], baseline)
    hessians = np.ones(y_train.shape[0])
    train_loss = [_mse(raw, y_train)]

    validation_loss: list[float] = []
    if validation_rows is not None:
        validation_codes = apply_bins(features[validation_rows], mapper).codes
        y_validation = target[validation_rows]
        raw_validation = np.full(y_validation.shape[0], baseline)
        validation_loss.append(_mse(raw_validation, y_validation))
    best_loss = validation_loss[0] if validation_loss else math.inf
    best_n_trees = 0
    no_improvement = 0
    stopped_early_at: int | None = None

    trees: list[Tree] = []
    for iteration in range(1, params.max_iter + 1):
        gradients = raw - y_train
        tree, row_values = TreeGrower(binned, gradients, hessians, params).grow()
        raw += lr * row_values
        trees.append(tree)
        train_loss.append(_mse(raw, y_train))

        if validation_rows is None:
            continue
        raw_validation += lr * tree.predict_binned(validation_codes)
        loss = _mse(raw_validation, y_validation)
        validation_loss.append(loss)
        if loss < best_loss - params.tol:
            best_loss = loss
            best_n_trees = iteration
            no_improvement = 0
        else:
            no_improvement += 1
        if no_improvement >= params.n_iter_no_change:
            stopped_early_at = iteration
            break

    if validation_rows is not None:
        trees = trees[:best_n_trees]
        train_loss = train_loss[: best_n_trees + 1]

    logger.debug(
        "Fitted boosted ensemble",
        extra={
            "n_rows": n_rows,
            "n_trees": len(trees),
            "stopped_early_at": stopped_early_at,
            "final_train_loss": train_loss[-1],
        },
    )

    return GbtModel(
        baseline=baseline,
        trees=tuple(trees),
        learning_rate=lr,
        bin_mapper=mapper,
        train_loss_curve=tuple(train_loss),
        validation_loss_curve=tuple(validation_loss),
        stopped_early_at=stopped_early_at,
    )


def predict(model: GbtModel, X: ArrayLike) -> NDArray[np.float64]:
    """
    Predict targets for raw feature rows.

    Raises:
        DimensionMismatchException: If the column count differs from the model's
    """
    features = np.asarray(X, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != model.n_features:
        raise DimensionMismatchException(model.n_features, features.shape, "X columns")
    codes = apply_bins(features, model.bin_mapper).codes
    raw = np.full(features.shape[0], model.baseline)
    for tree in model.trees:
        raw += model.learning_rate * tree.predict_binned(codes)
    return raw
