"""
Pydantic schemas for evaluation reports.
"""

from typing import Any

from pydantic import BaseModel, ConfigDict, Field, model_validator

# rmse >= mae holds exactly in real arithmetic; allow for rounding.
_RMSE_MAE_SLACK = 1e-9


class TargetMetrics(BaseModel):
    """
    Counts-scale metrics for one target.

    Example:
        {
            "oom_accuracy": 0.856,
            "mae_orders": 0.14,
            "mae": 43642.49,
            "rmse": 183539.29,
            "r2": 0.98,
            "n_rows": 120,
            "n_floored": 0
        }
    """

    model_config = ConfigDict(frozen=True)

    oom_accuracy: float = Field(ge=0.0, le=1.0)
    mae_orders: float = Field(ge=0.0)
    mae: float = Field(ge=0.0)
    rmse: float = Field(ge=0.0)
    r2: float = Field(le=1.0)
    n_rows: int = Field(ge=1)
    n_floored: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def validate_rmse_bound(self) -> "TargetMetrics":
        """RMSE never falls below MAE."""
        if self.rmse + _RMSE_MAE_SLACK * max(1.0, self.mae) < self.mae:
            raise ValueError("rmse must be >= mae")
        return self


class MetricsReport(BaseModel):
    """Evaluation results for both targets plus run metadata."""

    model_config = ConfigDict(frozen=True)

    comments: TargetMetrics
    likes: TargetMetrics
    metadata: dict[str, Any] = Field(default_factory=dict)

    def with_metadata(self, **metadata: Any) -> "MetricsReport":
        """Copy with extra metadata entries."""
        return self.model_copy(update={"metadata": {**self.metadata, **metadata}})
