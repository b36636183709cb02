"""
Process settings and configuration management.

This module provides centralized configuration using Pydantic Settings,
loading values from environment variables with sensible defaults.
Run-level options (paths, seeds, hyperparameters) live in ``RunConfig`` instead.
"""

from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Process configuration settings.

    All settings can be overridden via environment variables prefixed with
    ``ENGAGEMENT_`` (for example ``ENGAGEMENT_LOG_LEVEL=DEBUG``).
    See .env.example for available configuration options.
    """

    # Application Info
    APP_NAME: str = "Engagement Predictor"
    VERSION: str = "0.1.0"
    DEBUG: bool = False
    ENVIRONMENT: Literal["development", "production"] = "development"

    # Logging
    LOG_LEVEL: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = "INFO"

    # Parallelism (1 = run sequentially)
    N_JOBS: int = Field(default=1, ge=1)

    # Histogram binning
    BIN_SUBSAMPLE: int = Field(default=50_000, ge=1)

    model_config = SettingsConfigDict(
        env_prefix="ENGAGEMENT_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )


# Global settings instance
settings = Settings()
