"""
Feature Service - Feature Engineering Layer

Turns cleaned records into the design matrices used for modeling:
temporal features, log transforms, engagement ratios with top-quantile clipping,
and the inverse transform from predicted log ratios back to counts.

Clip thresholds and the reference date are fitted once (fit mode) and reused
unchanged for any later table (transform mode).
"""

import logging
import math
from dataclasses import dataclass, field
from datetime import date

import numpy as np
from numpy.typing import ArrayLike, NDArray

from engagement.exceptions import (
    DimensionMismatchException,
    EmptyInputException,
    InvalidDomainException,
    LengthMismatchException,
    MissingColumnException,
    NegativeAgeException,
)
from engagement.schemas.pipeline import (
    LATEST_IN_DATA,
    TARGET_NAMES,
    PipelineConfig,
    PipelineState,
)
from engagement.schemas.records import RawTable

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DesignMatrices:
    """
    Model-ready matrices for one table.

    ``Y`` holds [log_cr, log_lr] and ``true_counts`` holds raw [comments, likes];
    both are absent for unlabeled tables.
    """

    X: NDArray[np.float64]
    views: NDArray[np.float64]
    feature_order: tuple[str, ...]
    Y: NDArray[np.float64] | None = None
    true_counts: NDArray[np.float64] | None = None
    track_ids: tuple[str | None, ...] = field(default=())

    def __post_init__(self) -> None:
        n = self.X.shape[0]
        if self.X.ndim != 2 or self.X.shape[1] != len(self.feature_order):
            raise DimensionMismatchException(len(self.feature_order), self.X.shape, "X")
        if self.views.shape != (n,):
            raise DimensionMismatchException((n,), self.views.shape, "views")
        for name, matrix in (("Y", self.Y), ("true_counts", self.true_counts)):
            if matrix is not None and matrix.shape != (n, 2):
                raise DimensionMismatchException((n, 2), matrix.shape, name)

    @property
    def n_rows(self) -> int:
        return int(self.X.shape[0])

    @property
    def is_labeled(self) -> bool:
        return self.Y is not None and self.true_counts is not None

    def labels(self) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """
        (Y, true_counts) of a labeled table.

        Raises:
            MissingColumnException: If the table carried no Likes/Comments
        """
        if self.Y is None or self.true_counts is None:
            raise MissingColumnException("Likes/Comments")
        return self.Y, self.true_counts

    def take(self, rows: NDArray[np.intp]) -> "DesignMatrices":
        """Row subset in the given order."""
        return DesignMatrices(
            X=self.X[rows],
            views=self.views[rows],
            feature_order=self.feature_order,
            Y=None if self.Y is None else self.Y[rows],
            true_counts=None if self.true_counts is None else self.true_counts[rows],
            track_ids=tuple(self.track_ids[i] for i in rows) if self.track_ids else (),
        )


class FeatureService:
    """
    Service class for feature engineering and back-transformation.

    All methods are static and pure; a fitted PipelineState is immutable.
    """

    @staticmethod
    def derive_temporal(upload_date: date, reference_date: date) -> tuple[int, int, int]:
        """
        Temporal features of one upload.

        Args:
            upload_date: Upload calendar date
            reference_date: Date against which age is measured

        Returns:
            tuple[int, int, int]: (age_days, upload_month 1-12, upload_dow Monday=0)

        Raises:
            NegativeAgeException: If reference_date precedes upload_date

        Example:
            FeatureService.derive_temporal(date(2021, 3, 15), date(2021, 3, 20))  # (5, 3, 0)
        """
        if reference_date < upload_date:
            raise NegativeAgeException(upload_date, reference_date)
        return (reference_date - upload_date).days, upload_date.month, upload_date.weekday()

    @staticmethod
    def log1p(x: float) -> float:
        """
        Natural log of (1 + x) for x >= 0.

        Raises:
            InvalidDomainException: For negative or non-finite x
        """
        if not math.isfinite(x) or x < 0:
            raise InvalidDomainException("log1p", x)
        return float(np.log1p(x))

    @staticmethod
    def log1p_array(values: ArrayLike) -> NDArray[np.float64]:
        """Vectorized log1p with the same domain check."""
        array = np.asarray(values, dtype=np.float64)
        if not np.all(np.isfinite(array)) or np.any(array < 0):
            bad = array[~np.isfinite(array) | (array < 0)][0]
            raise InvalidDomainException("log1p", float(bad))
        return np.log1p(array)

    @staticmethod
    def compute_ratios(views: int, likes: int, comments: int) -> tuple[float, float, float]:
        """
        Engagement ratios of one record.

        Returns:
            tuple[float, float, float]: (comments/views, likes/views, comments/likes)

        Raises:
            InvalidDomainException: If views or likes is below 1 or comments is negative
        """
        if views < 1:
            raise InvalidDomainException("compute_ratios.views", views)
        if likes < 1:
            raise InvalidDomainException("compute_ratios.likes", likes)
        if comments < 0:
            raise InvalidDomainException("compute_ratios.comments", comments)
        return comments / views, likes / views, comments / likes

    @staticmethod
    def fit_clip(values: ArrayLike, q: float) -> float:
        """
        q-quantile by linear interpolation between order statistics at (n-1)*q.

        Args:
            values: Finite reals
            q: Quantile in (0, 1]

        Returns:
            float: Clip threshold; values above it are replaced by it

        Raises:
            EmptyInputException: If values is empty
            InvalidDomainException: If q is outside (0, 1] or values are not finite
        """
        array = np.asarray(values, dtype=np.float64)
        if array.size == 0:
            raise EmptyInputException("fit_clip")
        if not 0.0 < q <= 1.0:
            raise InvalidDomainException("fit_clip.q", q)
        if not np.all(np.isfinite(array)):
            raise InvalidDomainException("fit_clip.values", "non-finite")
        if q == 1.0:
            return float(array.max())
        return float(np.quantile(array, q, method="linear"))

    @staticmethod
    def anchor_reference_date(config: PipelineConfig, table: RawTable) -> PipelineConfig:
        """
        Resolve ``latest-in-data`` against ``table`` and pin it in a config copy.

        Train and tune anchor on the whole cleaned table before splitting, so no
        held-out upload post-dates the reference date fitted on the training side.

        Example:
            config = FeatureService.anchor_reference_date(PipelineConfig(), cleaned)
        """
        if config.reference_date != LATEST_IN_DATA or len(table) == 0:
            return config
        latest = max(record.upload_date for record in table.records)
        return config.model_copy(update={"reference_date": latest})

    @staticmethod
    def build_design(
        table: RawTable,
        config: PipelineConfig | None = None,
        state: PipelineState | None = None,
    ) -> tuple[DesignMatrices, PipelineState]:
        """
        Assemble X (and Y for labeled tables) from a cleaned table.

        Without ``state`` (fit mode) the reference date is resolved and clip
        thresholds are fitted on this table. With ``state`` (transform mode) both
        are reused and nothing is refitted; the state's own config wins.

        Args:
            table: Cleaned table
            config: Pipeline configuration (fit mode)
            state: Fitted pipeline state (transform mode)

        Returns:
            tuple[DesignMatrices, PipelineState]: Matrices and the state used

        Raises:
            EmptyInputException: If the table is empty
            NegativeAgeException: If an upload date is after the reference date
            MissingColumnException: If log_clr is required but counts are missing
        """
        if len(table) == 0:
            raise EmptyInputException("build_design")
        config = state.config if state is not None else (config or PipelineConfig())
        records = table.records

        upload_dates = [record.upload_date for record in records]
        views = np.array([record.views for record in records], dtype=np.float64)
        if np.any(views < 1):
            raise InvalidDomainException("build_design.views", float(views.min()))
        emotions = np.array([record.emotions for record in records], dtype=np.float64)

        if state is not None:
            reference_date = state.resolved_reference_date
        elif config.reference_date == LATEST_IN_DATA:
            reference_date = max(upload_dates)
        else:
            reference_date = config.reference_date  # type: ignore[assignment]

        temporal = np.array(
            [FeatureService.derive_temporal(d, reference_date) for d in upload_dates],
            dtype=np.float64,
        ).reshape(len(records), 3)

        labeled = table.is_labeled
        needs_counts = not config.drop_log_clr
        if needs_counts and not labeled:
            raise MissingColumnException("Likes/Comments (required by log_clr)")

        Y = true_counts = None
        clr_clipped = None
        thresholds: dict[str, float] = dict(state.clip_thresholds) if state else {}

        if labeled:
            likes = np.array([record.likes for record in records], dtype=np.float64)
            comments = np.array([record.comments for record in records], dtype=np.float64)
            if np.any(likes < 1):
                raise InvalidDomainException("build_design.likes", float(likes.min()))
            ratios = {"cr": comments / views, "lr": likes / views, "clr": comments / likes}

            if state is None:
                thresholds = {
                    name: FeatureService.fit_clip(values, config.clip_quantile)
                    for name, values in ratios.items()
                }
                logger.info(
                    "Fitted clip thresholds",
                    extra={
                        "thresholds": thresholds,
                        "reference_date": reference_date.isoformat(),
                        "n_rows": len(records),
                    },
                )

            clipped = {
                name: np.minimum(values, thresholds[name]) for name, values in ratios.items()
            }
            Y = np.column_stack(
                [
                    FeatureService.log1p_array(clipped["cr"]),
                    FeatureService.log1p_array(clipped["lr"]),
                ]
            )
            true_counts = np.column_stack([comments, likes])
            clr_clipped = clipped["clr"]
        elif state is None:
            raise MissingColumnException("Likes/Comments (required to fit the pipeline)")

        columns = [
            emotions,
            temporal[:, [0]],
            FeatureService.log1p_array(views)[:, None],
            temporal[:, [1]],
            temporal[:, [2]],
        ]
        if needs_counts and clr_clipped is not None:
            columns.append(FeatureService.log1p_array(clr_clipped)[:, None])
        X = np.hstack(columns)

        resolved = state or PipelineState(
            resolved_reference_date=reference_date,
            clip_thresholds=thresholds,
            config=config,
        )
        design = DesignMatrices(
            X=X,
            views=views,
            feature_order=config.feature_order,
            Y=Y,
            true_counts=true_counts,
            track_ids=tuple(record.track_id for record in records),
        )
        return design, resolved

    @staticmethod
    def back_transform(pred_log_cr: float, pred_log_lr: float, views: float) -> tuple[float, float]:
        """
        Predicted log ratios to predicted counts, floored at zero.

        Example:
            FeatureService.back_transform(math.log1p(0.01), math.log1p(0.1), 1000)  # (10.0, 100.0)
        """
        counts, _ = FeatureService.back_transform_batch(
            np.array([[pred_log_cr, pred_log_lr]]), np.array([views])
        )
        return float(counts[0, 0]), float(counts[0, 1])

    @staticmethod
    def back_transform_batch(
        predictions: ArrayLike, views: ArrayLike
    ) -> tuple[NDArray[np.float64], tuple[int, int]]:
        """
        Row-wise back-transformation of [log_cr, log_lr] predictions.

        Args:
            predictions: n x 2 predicted log ratios
            views: n view counts (>= 1)

        Returns:
            tuple[NDArray, tuple[int, int]]: n x 2 [comments, likes] and the number of
                floored cells per target
        """
        pred = np.asarray(predictions, dtype=np.float64)
        view_counts = np.asarray(views, dtype=np.float64)
        if pred.ndim != 2 or pred.shape[1] != len(TARGET_NAMES):
            raise DimensionMismatchException((None, 2), pred.shape, "predictions")
        if pred.shape[0] != view_counts.shape[0]:
            raise LengthMismatchException(pred.shape[0], view_counts.shape[0])
        if not np.all(np.isfinite(pred)):
            raise InvalidDomainException("back_transform", "non-finite prediction")

        counts = np.expm1(pred) * view_counts[:, None]
        negative = counts < 0
        per_target = negative.sum(axis=0)
        n_floored = (int(per_target[0]), int(per_target[1]))
        if any(n_floored):
            logger.debug(
                "Floored negative back-transformed counts",
                extra={"n_floored_comments": n_floored[0], "n_floored_likes": n_floored[1]},
            )
        return np.where(negative, 0.0, counts), n_floored
