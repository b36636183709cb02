"""
Pytest configuration and shared fixtures.

This module provides common fixtures for CSV files, synthetic tables and fitted
design matrices used across all test files.
"""

from collections.abc import Callable
from pathlib import Path

import pytest

from engagement.schemas.pipeline import PipelineConfig, PipelineState
from engagement.schemas.records import RawTable
from engagement.schemas.synth import SynthConfig
from engagement.services.feature_service import DesignMatrices, FeatureService
from engagement.services.synth_service import SynthService
from tests.factories import CSV_HEADER


@pytest.fixture
def write_csv(tmp_path: Path) -> Callable[..., Path]:
    """
    Factory writing a CSV file under tmp_path.

    Usage:
        path = write_csv([csv_row(), csv_row(views="")], header=CSV_HEADER)
    """

    def _write(
        rows: list[list[str]], header: list[str] | None = None, name: str = "in.csv"
    ) -> Path:
        lines = [",".join(header or CSV_HEADER)] + [",".join(row) for row in rows]
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return _write


@pytest.fixture(scope="session")
def synth_table() -> RawTable:
    """Default synthetic table (600 rows, seed 42)."""
    return SynthService.generate(SynthConfig(seed=42))


@pytest.fixture(scope="session")
def small_synth_table() -> RawTable:
    """Small synthetic table for fast model tests."""
    return SynthService.generate(SynthConfig(n_rows=120, seed=7))


@pytest.fixture(scope="session")
def small_design(small_synth_table: RawTable) -> tuple[DesignMatrices, PipelineState]:
    """Fit-mode design matrices of the small synthetic table."""
    return FeatureService.build_design(small_synth_table, PipelineConfig())
