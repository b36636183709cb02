"""
Pydantic schemas for the feature pipeline configuration and its fitted state.
"""

import math
from datetime import date
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

from engagement.schemas.records import EMOTION_NAMES

LATEST_IN_DATA = "latest-in-data"

TEMPORAL_FEATURES: tuple[str, ...] = ("age_days", "log_views", "upload_month", "upload_dow")
FEATURE_ORDER: tuple[str, ...] = EMOTION_NAMES + TEMPORAL_FEATURES + ("log_clr",)
TARGET_NAMES: tuple[str, str] = ("log_cr", "log_lr")
CLIPPED_RATIOS: tuple[str, ...] = ("cr", "lr", "clr")


class PipelineConfig(BaseModel):
    """
    Feature pipeline configuration.

    Example:
        PipelineConfig(reference_date=date(2024, 1, 1), clip_quantile=0.99)
    """

    model_config = ConfigDict(frozen=True)

    reference_date: date | Literal["latest-in-data"] = LATEST_IN_DATA
    clip_quantile: float = Field(default=0.99, gt=0.0, le=1.0)
    drop_log_clr: bool = False

    @property
    def feature_order(self) -> tuple[str, ...]:
        """Column order of X: emotions, temporal features, then log_clr unless dropped."""
        if self.drop_log_clr:
            return FEATURE_ORDER[:-1]
        return FEATURE_ORDER


class PipelineState(BaseModel):
    """
    Fitted pipeline state, reused unchanged in transform mode.

    Example:
        {
            "resolved_reference_date": "2024-06-30",
            "clip_thresholds": {"cr": 0.0123, "lr": 0.21, "clr": 0.35},
            "config": {"reference_date": "latest-in-data", "clip_quantile": 0.99}
        }
    """

    model_config = ConfigDict(frozen=True)

    resolved_reference_date: date
    clip_thresholds: dict[str, float]
    config: PipelineConfig = PipelineConfig()

    @field_validator("clip_thresholds")
    @classmethod
    def validate_thresholds(cls, v: dict[str, float]) -> dict[str, float]:
        """Thresholds exist for cr, lr and clr and are finite and nonnegative."""
        missing = [name for name in CLIPPED_RATIOS if name not in v]
        if missing:
            raise ValueError(f"Missing clip thresholds: {missing}")
        for name, value in v.items():
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"Clip threshold {name} must be finite and >= 0")
        return v

    @property
    def feature_order(self) -> tuple[str, ...]:
        return self.config.feature_order
