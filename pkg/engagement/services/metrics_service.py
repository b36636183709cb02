"""
Metrics Service - Evaluation Layer

Order-of-magnitude accuracy, error in orders of magnitude, and the standard
regression metrics, all computed on back-transformed counts.

Counts below 1 (a true zero, or a floored prediction) share decade 0. Decades are
found by comparing against exact integer powers of ten, never through log10.
"""

import bisect
import logging
import math

import numpy as np
from numpy.typing import ArrayLike, NDArray

from engagement.exceptions import (
    ConstantTruthException,
    DimensionMismatchException,
    EmptyInputException,
    InvalidDomainException,
    LengthMismatchException,
)
from engagement.schemas.report import MetricsReport, TargetMetrics
from engagement.services.feature_service import DesignMatrices, FeatureService
from engagement.services.model_service import EngagementModel, ModelService

logger = logging.getLogger(__name__)

# 10**1 .. 10**308 as exact Python integers; float(10**k) is exact up to k = 22.
_DECADES: list[int] = [10**k for k in range(1, 309)]
_DECADES_FLOAT = np.array([float(power) for power in _DECADES[:22]])


def _pair(
    pred: ArrayLike, truth: ArrayLike, operation: str, counts: bool = False
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    p = np.asarray(pred, dtype=np.float64).ravel()
    t = np.asarray(truth, dtype=np.float64).ravel()
    if p.shape[0] != t.shape[0]:
        raise LengthMismatchException(p.shape[0], t.shape[0])
    if p.shape[0] == 0:
        raise EmptyInputException(operation)
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(t))):
        raise InvalidDomainException(operation, "non-finite value")
    if counts and (np.any(p < 0) or np.any(t < 0)):
        raise InvalidDomainException(operation, float(min(p.min(), t.min())))
    return p, t


class MetricsService:
    """
    Service class for evaluation metrics.

    All methods are pure and thread-safe.
    """

    @staticmethod
    def order_of(x: float) -> int:
        """
        Decade of a count: floor(log10(max(x, 1))).

        Raises:
            InvalidDomainException: For negative or non-finite x

        Example:
            MetricsService.order_of(999)   # 2
            MetricsService.order_of(1000)  # 3
        """
        if not math.isfinite(x) or x < 0:
            raise InvalidDomainException("order_of", x)
        return bisect.bisect_right(_DECADES, float(x))

    @staticmethod
    def orders_of(values: ArrayLike) -> NDArray[np.int64]:
        """Vectorized order_of."""
        array = np.asarray(values, dtype=np.float64)
        if not np.all(np.isfinite(array)) or np.any(array < 0):
            raise InvalidDomainException("order_of", "negative or non-finite value")
        if array.size and array.max() >= _DECADES_FLOAT[-1]:
            return np.array([MetricsService.order_of(float(v)) for v in array.ravel()]).reshape(
                array.shape
            )
        return np.searchsorted(_DECADES_FLOAT, array, side="right").astype(np.int64)

    @staticmethod
    def oom_accuracy(pred: ArrayLike, truth: ArrayLike) -> float:
        """
        Share of rows whose predicted and true counts fall in the same decade.

        Example:
            MetricsService.oom_accuracy([950, 1500], [1200, 9999])  # 0.5
        """
        p, t = _pair(pred, truth, "oom_accuracy", counts=True)
        return float(np.mean(MetricsService.orders_of(p) == MetricsService.orders_of(t)))

    @staticmethod
    def mae_orders(pred: ArrayLike, truth: ArrayLike) -> float:
        """Mean absolute difference of log10(max(count, 1))."""
        p, t = _pair(pred, truth, "mae_orders", counts=True)
        return float(np.mean(np.abs(np.log10(np.maximum(p, 1.0)) - np.log10(np.maximum(t, 1.0)))))

    @staticmethod
    def mae(pred: ArrayLike, truth: ArrayLike) -> float:
        p, t = _pair(pred, truth, "mae")
        return float(np.mean(np.abs(t - p)))

    @staticmethod
    def rmse(pred: ArrayLike, truth: ArrayLike) -> float:
        p, t = _pair(pred, truth, "rmse")
        return float(np.sqrt(np.mean((t - p) ** 2)))

    @staticmethod
    def r2(pred: ArrayLike, truth: ArrayLike) -> float:
        """
        Coefficient of determination 1 - SS_res / SS_tot.

        Raises:
            ConstantTruthException: If the truth vector has zero variance
        """
        p, t = _pair(pred, truth, "r2")
        ss_tot = float(np.sum((t - t.mean()) ** 2))
        if ss_tot == 0.0:
            raise ConstantTruthException()
        ss_res = float(np.sum((t - p) ** 2))
        return 1.0 - ss_res / ss_tot

    @staticmethod
    def target_metrics(pred: ArrayLike, truth: ArrayLike, n_floored: int = 0) -> TargetMetrics:
        """All counts-scale metrics for one target."""
        p, t = _pair(pred, truth, "target_metrics", counts=True)
        mae = MetricsService.mae(p, t)
        rmse = MetricsService.rmse(p, t)
        return TargetMetrics(
            oom_accuracy=MetricsService.oom_accuracy(p, t),
            mae_orders=MetricsService.mae_orders(p, t),
            mae=mae,
            rmse=rmse,
            r2=MetricsService.r2(p, t),
            n_rows=int(p.shape[0]),
            n_floored=n_floored,
        )

    @staticmethod
    def evaluate(model: EngagementModel, test: DesignMatrices) -> MetricsReport:
        """
        Predict, back-transform with the test views, and score both targets.

        Args:
            model: Fitted model
            test: Labeled matrices built in transform mode with the model's pipeline state

        Returns:
            MetricsReport: Comments and likes metrics

        Raises:
            MissingColumnException: If the test matrices carry no true counts
            DimensionMismatchException: If the feature layout differs from the model's
            ConstantTruthException: If a target's true counts are all equal

        Example:
            report = MetricsService.evaluate(model, test_design)
            print(report.likes.r2)
        """
        _, true_counts = test.labels()
        if tuple(test.feature_order) != tuple(model.feature_order):
            raise DimensionMismatchException(model.feature_order, test.feature_order, "features")

        predictions = ModelService.predict_multi(model, test.X)
        counts, floored = FeatureService.back_transform_batch(predictions, test.views)

        report = MetricsReport(
            comments=MetricsService.target_metrics(counts[:, 0], true_counts[:, 0], floored[0]),
            likes=MetricsService.target_metrics(counts[:, 1], true_counts[:, 1], floored[1]),
        )
        logger.info(
            "Evaluated model",
            extra={
                "n_rows": test.n_rows,
                "r2_comments": report.comments.r2,
                "r2_likes": report.likes.r2,
            },
        )
        return report

    @staticmethod
    def render_table(report: MetricsReport) -> str:
        """
        Aligned text table: one row per metric, one column per target.

        Example output:
            Metric                               Comments          Likes
            Order-of-magnitude accuracy            74.40%         85.60%
            ...
        """
        rows: list[tuple[str, str, str]] = [("Metric", "Comments", "Likes")]

        def add(label: str, fmt: str, attribute: str) -> None:
            values = (getattr(report.comments, attribute), getattr(report.likes, attribute))
            rows.append((label, *(format(v, fmt) for v in values)))  # type: ignore[arg-type]

        add("Order-of-magnitude accuracy", ".2%", "oom_accuracy")
        add("Mean absolute error (orders)", ".4f", "mae_orders")
        add("Mean absolute error", ",.2f", "mae")
        add("Root mean squared error (RMSE)", ",.2f", "rmse")
        add("Coefficient of determination (R2)", ".4f", "r2")
        add("Rows evaluated", "d", "n_rows")

        label_width = max(len(row[0]) for row in rows)
        value_width = max(len(cell) for row in rows for cell in row[1:])
        lines = [
            f"{label:<{label_width}}  {left:>{value_width}}  {right:>{value_width}}"
            for label, left, right in rows
        ]
        return "\n".join(lines) + "\n"
