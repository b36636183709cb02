"""Pydantic schemas package for records, configurations, parameters and reports."""

from engagement.schemas.params import GbtParams
from engagement.schemas.pipeline import FEATURE_ORDER, TARGET_NAMES, PipelineConfig, PipelineState
from engagement.schemas.records import EMOTION_NAMES, ColumnSchema, RawRecord, RawTable
from engagement.schemas.report import MetricsReport, TargetMetrics
from engagement.schemas.synth import SynthConfig
from engagement.schemas.tuning import (
    HalvingConfig,
    ParamSpace,
    RungSummary,
    SearchResult,
    TrialRecord,
)

__all__ = [
    # Record schemas
    "EMOTION_NAMES",
    "ColumnSchema",
    "RawRecord",
    "RawTable",
    # Pipeline schemas
    "FEATURE_ORDER",
    "TARGET_NAMES",
    "PipelineConfig",
    "PipelineState",
    # Model and tuning schemas
    "GbtParams",
    "HalvingConfig",
    "ParamSpace",
    "RungSummary",
    "SearchResult",
    "TrialRecord",
    # Reports
    "MetricsReport",
    "TargetMetrics",
    # Synthetic data
    "SynthConfig",
]
