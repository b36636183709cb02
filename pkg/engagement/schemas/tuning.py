"""
Pydantic schemas for successive-halving hyperparameter search.
"""

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from engagement.schemas.params import GbtParams


class ParamSpace(BaseModel):
    """
    Search space for the random candidates.

    Ranges are log-uniform ``(low, high)`` pairs; choices are sampled uniformly.

    Example:
        ParamSpace(learning_rate=(0.05, 0.2), max_leaf_nodes=(15, 31))
    """

    model_config = ConfigDict(frozen=True)

    learning_rate: tuple[float, float] = (0.01, 0.3)
    max_leaf_nodes: tuple[int, ...] = (15, 31, 63, 127)
    min_samples_leaf: tuple[int, ...] = (5, 10, 20, 50)
    l2_regularization: tuple[float, float] = (1e-4, 10.0)
    max_bins: int = Field(default=255, ge=2, le=255)

    @field_validator("learning_rate", "l2_regularization")
    @classmethod
    def validate_log_range(cls, v: tuple[float, float]) -> tuple[float, float]:
        """Log-uniform bounds are positive and ordered."""
        low, high = v
        if low <= 0 or high <= 0:
            raise ValueError("Log-uniform bounds must be positive")
        if low > high:
            raise ValueError("Range lower bound exceeds upper bound")
        return v

    @field_validator("max_leaf_nodes", "min_samples_leaf")
    @classmethod
    def validate_choices(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        """Choice sets are non-empty."""
        if not v:
            raise ValueError("Choice set must not be empty")
        return v


class HalvingConfig(BaseModel):
    """
    Successive-halving schedule. The resource is the number of boosting iterations.

    Example:
        HalvingConfig(n_candidates=9, factor=3, min_resource=10, max_resource=90)
    """

    model_config = ConfigDict(frozen=True)

    n_candidates: int = Field(default=64, ge=1)
    factor: int = Field(default=3, ge=2)
    min_resource: int = Field(default=27, ge=1)
    max_resource: int = Field(default=729, ge=1)
    cv_folds: int = Field(default=5, ge=2)
    seed: int = 0

    @model_validator(mode="after")
    def validate_resources(self) -> "HalvingConfig":
        """Minimum resource cannot exceed the maximum."""
        if self.min_resource > self.max_resource:
            raise ValueError("min_resource must not exceed max_resource")
        return self

    @property
    def n_rungs(self) -> int:
        """floor(log_factor(max/min)) + 1, computed in integers."""
        rungs = 1
        resource = self.min_resource
        while resource * self.factor <= self.max_resource:
            resource *= self.factor
            rungs += 1
        return rungs


class TrialRecord(BaseModel):
    """One (rung, candidate) evaluation."""

    model_config = ConfigDict(frozen=True)

    rung: int
    candidate_index: int
    resource: int
    score: float
    params: GbtParams


class RungSummary(BaseModel):
    """Realized size and resource of one rung."""

    model_config = ConfigDict(frozen=True)

    rung: int
    n_candidates: int
    resource: int


class SearchResult(BaseModel):
    """
    Outcome of a halving search.

    ``best_params`` carries the final-rung resource as ``max_iter`` with early
    stopping restored, ready for the final refit.
    """

    model_config = ConfigDict(frozen=True)

    best_params: GbtParams
    best_index: int
    best_score: float
    trial_log: tuple[TrialRecord, ...]
    schedule: tuple[RungSummary, ...]

    def rung_trials(self, rung: int) -> list[TrialRecord]:
        """Trials of one rung in candidate order."""
        return [trial for trial in self.trial_log if trial.rung == rung]
