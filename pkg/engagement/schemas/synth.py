"""
Pydantic schema for the synthetic dataset generator.
"""

from datetime import date

from pydantic import BaseModel, ConfigDict, Field, model_validator


class SynthConfig(BaseModel):
    """
    Synthetic dataset configuration.

    Example:
        SynthConfig(n_rows=600, seed=42, comment_noise_sd=0.9)
    """

    model_config = ConfigDict(frozen=True)

    n_rows: int = Field(default=600, ge=10)
    seed: int = 42
    like_noise_sd: float = Field(default=0.05, ge=0.0)
    comment_noise_sd: float = Field(default=0.9, ge=0.0)
    start_date: date = date(2015, 1, 1)
    end_date: date = date(2024, 12, 31)

    @model_validator(mode="after")
    def validate_date_range(self) -> "SynthConfig":
        """Start date cannot be after end date."""
        if self.start_date > self.end_date:
            raise ValueError("start_date must not be after end_date")
        return self
