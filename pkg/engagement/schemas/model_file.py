"""
Pydantic schemas for the persisted model document.

The model file is a JSON object. Reals are written in shortest round-trip decimal
form, so parsing the file reproduces every stored value exactly.
"""

from datetime import date
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from engagement.schemas.params import GbtParams
from engagement.schemas.pipeline import PipelineConfig

FORMAT_VERSION = 1


class LeafNodeDocument(BaseModel):
    """Terminal node: ``{"leaf": value}``."""

    model_config = ConfigDict(extra="forbid")

    leaf: float


class SplitNodeDocument(BaseModel):
    """
    Internal node. Rows with bin index <= ``bin`` on ``feature`` go to ``left``.

    Example:
        {"feature": 12, "bin": 40, "threshold": 9.21, "left": 1, "right": 2}
    """

    model_config = ConfigDict(extra="forbid")

    feature: int = Field(ge=0)
    bin: int = Field(ge=0)
    threshold: float
    left: int = Field(ge=1)
    right: int = Field(ge=1)


NodeDocument = LeafNodeDocument | SplitNodeDocument


class GbtModelDocument(BaseModel):
    """One boosted ensemble."""

    model_config = ConfigDict(extra="forbid")

    baseline: float
    learning_rate: float = Field(ge=0.0)
    bin_mapper: list[list[float]]
    trees: list[list[NodeDocument]]
    train_loss_curve: list[float] = Field(default_factory=list)
    validation_loss_curve: list[float] = Field(default_factory=list)
    stopped_early_at: int | None = None


class PipelineDocument(BaseModel):
    """Fitted feature-pipeline state."""

    model_config = ConfigDict(extra="forbid")

    reference_date: date
    clip_thresholds: dict[str, float]
    config: PipelineConfig = PipelineConfig()


class ModelDocument(BaseModel):
    """
    Top-level model file.

    Example:
        {
            "format_version": 1,
            "feature_order": ["Valence", ..., "log_clr"],
            "pipeline": {"reference_date": "2024-06-30", "clip_thresholds": {...}},
            "params_used": {"log_cr": {...}, "log_lr": {...}},
            "model_cr": {...},
            "model_lr": {...}
        }
    """

    model_config = ConfigDict(extra="forbid")

    format_version: Literal[1]
    feature_order: list[str]
    pipeline: PipelineDocument
    params_used: dict[str, GbtParams]
    model_cr: GbtModelDocument
    model_lr: GbtModelDocument
