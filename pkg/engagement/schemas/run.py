"""
Pydantic schema for one CLI run.

A RunConfig is assembled from three layers, later layers winning: model defaults,
a ``key=value`` config file, and command-line flags. Section overrides (``gbt``,
``halving``, ``space``, ``synth``) hold raw values that are validated when the
section is built.
"""

from datetime import date
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

from engagement.exceptions import InvalidConfigException, MissingConfigException
from engagement.schemas.params import GbtParams
from engagement.schemas.pipeline import LATEST_IN_DATA, PipelineConfig
from engagement.schemas.records import ColumnSchema
from engagement.schemas.synth import SynthConfig
from engagement.schemas.tuning import HalvingConfig, ParamSpace

PATH_FIELDS: tuple[str, ...] = ("input", "model", "report", "output", "trial_log", "best_params")


def _section(model: type[BaseModel], name: str, values: dict[str, Any]) -> dict[str, Any]:
    unknown = sorted(set(values) - set(model.model_fields))
    if unknown:
        raise InvalidConfigException(f"{name}.{unknown[0]}", "unknown key")
    return values


class RunConfig(BaseModel):
    """
    Options of one CLI run.

    Example:
        RunConfig(input=Path("songs.csv"), model=Path("model.json"), seed=7, split=0.75)
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    # Paths
    input: Path | None = None
    model: Path | None = None
    report: Path | None = None
    output: Path | None = None
    trial_log: Path | None = None
    best_params: Path | None = None

    # Split
    seed: int = 42
    split: float = Field(default=0.8, gt=0.0, lt=1.0)

    # Ingestion and features
    columns: dict[str, str] = Field(default_factory=dict)
    reference_date: date | Literal["latest-in-data"] = LATEST_IN_DATA
    clip_quantile: float = Field(default=0.99, gt=0.0, le=1.0)
    drop_log_clr: bool = False

    # Section overrides
    gbt: dict[str, Any] = Field(default_factory=dict)
    halving: dict[str, Any] = Field(default_factory=dict)
    space: dict[str, Any] = Field(default_factory=dict)
    synth: dict[str, Any] = Field(default_factory=dict)

    refit: bool = False
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] | None = None

    @field_validator(*PATH_FIELDS)
    @classmethod
    def validate_path(cls, v: Path | None) -> Path | None:
        """Paths, when given, are non-empty."""
        if v is not None and str(v).strip() in ("", "."):
            raise ValueError("path must not be empty")
        return v

    def require(self, name: str) -> Path:
        """
        Path option that the current command cannot run without.

        Raises:
            MissingConfigException: If the option is unset
        """
        value = getattr(self, name)
        if value is None:
            raise MissingConfigException(f"--{name.replace('_', '-')}")
        return Path(value)

    def column_schema(self) -> ColumnSchema:
        schema = ColumnSchema()
        known = set(ColumnSchema.model_fields) - {"emotions"}
        unknown = sorted(set(self.columns) - known - set(schema.emotions))
        if unknown:
            raise InvalidConfigException(f"column.{unknown[0]}", "unknown column field")
        return schema.remap(self.columns)

    def pipeline_config(self) -> PipelineConfig:
        return PipelineConfig(
            reference_date=self.reference_date,
            clip_quantile=self.clip_quantile,
            drop_log_clr=self.drop_log_clr,
        )

    def gbt_params(self) -> GbtParams:
        """Hyperparameters; the run seed applies unless ``gbt.seed`` is set."""
        return GbtParams(**{"seed": self.seed, **_section(GbtParams, "gbt", self.gbt)})

    def halving_config(self) -> HalvingConfig:
        overrides = _section(HalvingConfig, "halving", self.halving)
        return HalvingConfig(**{"seed": self.seed, **overrides})

    def param_space(self) -> ParamSpace:
        return ParamSpace(**_section(ParamSpace, "space", self.space))

    def synth_config(self) -> SynthConfig:
        return SynthConfig(**{"seed": self.seed, **_section(SynthConfig, "synth", self.synth)})

    def validate_sections(self) -> None:
        """
        Build every section once so that bad values surface before any work starts.

        Raises:
            InvalidConfigException: For unknown keys
            ValidationError: For out-of-range values
        """
        self.column_schema()
        self.pipeline_config()
        self.gbt_params()
        self.halving_config()
        self.param_space()
        self.synth_config()
