"""
Tests for MetricsService evaluation metrics.

These tests pin the hand-checkable examples of every metric, including the
decade boundaries of order_of.
"""

import math

import numpy as np
import pytest

from engagement.exceptions import (
    ConstantTruthException,
    DimensionMismatchException,
    EmptyInputException,
    InvalidDomainException,
    LengthMismatchException,
    MissingColumnException,
)
from engagement.schemas.params import GbtParams
from engagement.schemas.pipeline import PipelineState
from engagement.schemas.report import MetricsReport, TargetMetrics
from engagement.services.feature_service import DesignMatrices
from engagement.services.metrics_service import MetricsService
from engagement.services.model_service import ModelService


class TestOrderOf:
    """Test suite for order_of and orders_of."""

    def test_small_values(self) -> None:
        """Test the defining examples and the clamp below one."""
        assert MetricsService.order_of(9) == 0
        assert MetricsService.order_of(10) == 1
        assert MetricsService.order_of(999) == 2
        assert MetricsService.order_of(0) == 0
        assert MetricsService.order_of(0.5) == 0

    @pytest.mark.parametrize("k", range(1, 16))
    def test_decade_boundaries(self, k: int) -> None:
        """Test exact powers of ten and the integer just below them."""
        assert MetricsService.order_of(10**k) == k
        assert MetricsService.order_of(10**k - 1) == k - 1
        assert MetricsService.orders_of([10**k, 10**k - 1]).tolist() == [k, k - 1]

    def test_vectorized_matches_scalar(self) -> None:
        """Test that orders_of agrees with order_of."""
        values = np.random.default_rng(0).uniform(0, 1e9, size=500)

        expected = [MetricsService.order_of(float(v)) for v in values]

        assert MetricsService.orders_of(values).tolist() == expected

    def test_very_large_values(self) -> None:
        """Test the exact path for values beyond 1e22."""
        assert MetricsService.orders_of([1e22, 5.0]).tolist() == [22, 0]

    def test_domain(self) -> None:
        """Test that negative and non-finite values are rejected."""
        with pytest.raises(InvalidDomainException):
            MetricsService.order_of(-1)
        with pytest.raises(InvalidDomainException):
            MetricsService.order_of(math.nan)
        with pytest.raises(InvalidDomainException):
            MetricsService.orders_of([1.0, -2.0])


class TestOrderMetrics:
    """Test suite for oom_accuracy and mae_orders."""

    def test_oom_accuracy(self) -> None:
        """Test identity and the mixed example."""
        assert MetricsService.oom_accuracy([5, 50, 500], [5, 50, 500]) == 1.0
        assert MetricsService.oom_accuracy([950, 1500], [1200, 9999]) == 0.5

    def test_oom_accuracy_scale_invariance(self) -> None:
        """Test that scaling both sides by ten keeps the accuracy."""
        pred = np.array([3.0, 47.0, 120.0, 9000.0])
        truth = np.array([4.0, 520.0, 110.0, 80.0])

        assert MetricsService.oom_accuracy(pred * 10, truth * 10) == MetricsService.oom_accuracy(
            pred, truth
        )

    def test_mae_orders(self) -> None:
        """Test zero error, one decade and the single-element example."""
        truth = np.array([1.0, 37.0, 4500.0])
        assert MetricsService.mae_orders(truth, truth) == 0.0
        assert MetricsService.mae_orders(10 * truth, truth) == pytest.approx(1.0)
        assert MetricsService.mae_orders([100], [1000]) == pytest.approx(1.0)

    def test_counts_must_be_nonnegative(self) -> None:
        """Test that negative counts are rejected."""
        with pytest.raises(InvalidDomainException):
            MetricsService.oom_accuracy([-1.0], [1.0])


class TestRegressionMetrics:
    """Test suite for mae, rmse and r2."""

    def test_perfect_prediction(self) -> None:
        """Test metrics of an exact prediction."""
        truth = [3.0, 7.0, 11.0]
        assert MetricsService.mae(truth, truth) == 0.0
        assert MetricsService.rmse(truth, truth) == 0.0
        assert MetricsService.r2(truth, truth) == 1.0

    def test_arithmetic_example(self) -> None:
        """Test mae and rmse on a two-element example."""
        assert MetricsService.mae([1, 2], [1, 4]) == 1.0
        assert MetricsService.rmse([1, 2], [1, 4]) == pytest.approx(math.sqrt(2))

    def test_mean_prediction_has_zero_r2(self) -> None:
        """Test that predicting the mean gives r2 = 0."""
        truth = np.array([1.0, 2.0, 6.0, 11.0])

        assert MetricsService.r2(np.full(4, truth.mean()), truth) == pytest.approx(0.0, abs=1e-12)

    def test_errors(self) -> None:
        """Test constant truth, length mismatch and empty inputs."""
        with pytest.raises(ConstantTruthException):
            MetricsService.r2([1.0, 2.0], [5.0, 5.0])
        with pytest.raises(LengthMismatchException):
            MetricsService.mae([1.0], [1.0, 2.0])
        with pytest.raises(EmptyInputException):
            MetricsService.rmse([], [])

    def test_target_metrics(self) -> None:
        """Test the bundled per-target metrics."""
        metrics = MetricsService.target_metrics([100.0, 0.0], [120.0, 3.0], n_floored=1)

        assert metrics.n_rows == 2
        assert metrics.n_floored == 1
        assert metrics.oom_accuracy == 1.0
        assert metrics.mae == pytest.approx(11.5)
        assert metrics.rmse >= metrics.mae


class TestEvaluate:
    """Test suite for MetricsService.evaluate and render_table."""

    def test_evaluate(self, small_design: tuple[DesignMatrices, PipelineState]) -> None:
        """Test evaluation of a model on labeled matrices."""
        design, state = small_design
        Y, _ = design.labels()
        model = ModelService.fit_multi(design.X, Y, GbtParams(max_iter=20), state)

        report = MetricsService.evaluate(model, design)

        assert report.comments.n_rows == design.n_rows
        assert report.likes.n_rows == design.n_rows
        assert 0.0 <= report.likes.oom_accuracy <= 1.0
        assert report.likes.r2 <= 1.0

    def test_evaluate_reports_floored_counts(
        self,
        small_design: tuple[DesignMatrices, PipelineState],
        monkeypatch: pytest.MonkeyPatch,
    ) -> None:
        """Test that per-target floored counts come from the back-transform."""
        design, state = small_design
        Y, _ = design.labels()
        model = ModelService.fit_multi(design.X, Y, GbtParams(max_iter=5), state)
        predictions = np.tile([0.01, 0.1], (design.n_rows, 1))
        predictions[:3, 0] = -0.5
        predictions[5, 1] = -0.2
        monkeypatch.setattr(ModelService, "predict_multi", staticmethod(lambda *a: predictions))

        report = MetricsService.evaluate(model, design)

        assert report.comments.n_floored == 3
        assert report.likes.n_floored == 1

    def test_evaluate_requires_labels(
        self, small_design: tuple[DesignMatrices, PipelineState]
    ) -> None:
        """Test that unlabeled matrices cannot be evaluated."""
        design, state = small_design
        Y, _ = design.labels()
        model = ModelService.fit_multi(design.X, Y, GbtParams(max_iter=5), state)
        unlabeled = DesignMatrices(
            X=design.X, views=design.views, feature_order=design.feature_order
        )

        with pytest.raises(MissingColumnException):
            MetricsService.evaluate(model, unlabeled)

    def test_evaluate_feature_mismatch(
        self, small_design: tuple[DesignMatrices, PipelineState]
    ) -> None:
        """Test that matrices with another feature layout are refused."""
        design, state = small_design
        Y, true_counts = design.labels()
        model = ModelService.fit_multi(design.X, Y, GbtParams(max_iter=5), state)
        reordered = DesignMatrices(
            X=design.X[:, ::-1],
            views=design.views,
            feature_order=design.feature_order[::-1],
            Y=Y,
            true_counts=true_counts,
        )

        with pytest.raises(DimensionMismatchException):
            MetricsService.evaluate(model, reordered)

    def test_render_table(self) -> None:
        """Test the aligned text table."""
        metrics = TargetMetrics(
            oom_accuracy=0.744, mae_orders=0.25, mae=1234.5, rmse=2345.25, r2=0.41, n_rows=120
        )
        report = MetricsReport(comments=metrics, likes=metrics)

        table = MetricsService.render_table(report)
        lines = table.splitlines()

        assert table.endswith("\n")
        assert len(lines) == 7
        assert lines[0].startswith("Metric")
        assert "74.40%" in lines[1]
        assert "1,234.50" in lines[3]
        assert len({len(line) for line in lines}) == 1
