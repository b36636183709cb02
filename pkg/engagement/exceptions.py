"""
Custom exception classes for the Engagement Predictor.

Provides structured error handling for ingestion, feature engineering, model
fitting, persistence and configuration. Every exception carries the process exit
code the CLI reports for it.
"""

from typing import Any, Optional


# Base exception classes


class EngagementException(Exception):
    """Base exception for all Engagement Predictor errors."""

    def __init__(
        self,
        message: str,
        exit_code: int = 1,
        detail: Optional[dict[str, Any]] = None,
    ):
        self.message = message
        self.exit_code = exit_code
        self.detail = detail or {}
        super().__init__(self.message)


# Data ingestion exceptions


class DataException(EngagementException):
    """Base exception for input data errors."""

    def __init__(
        self,
        message: str,
        exit_code: int = 1,
        detail: Optional[dict[str, Any]] = None,
    ):
        super().__init__(message, exit_code, detail)


class MissingColumnException(DataException):
    """A required column is absent from the CSV header."""

    def __init__(self, column: str):
        super().__init__(
            message=f"Missing required column: {column}",
            detail={"column": column},
        )
        self.column = column


class CellParseException(DataException):
    """A non-blank cell could not be parsed."""

    def __init__(self, row: int, column: str, value: str, reason: Optional[str] = None):
        msg = f"Malformed value {value!r} in row {row}, column {column!r}"
        if reason:
            msg = f"{msg}: {reason}"
        super().__init__(
            message=msg,
            detail={"row": row, "column": column, "value": value},
        )
        self.row = row
        self.column = column


class EmptyAfterCleanException(DataException):
    """No record survived cleaning."""

    def __init__(self, n_input: int):
        super().__init__(
            message=f"No records left after cleaning ({n_input} in input)",
            detail={"n_input": n_input},
        )


# Numeric domain exceptions


class ComputationException(EngagementException):
    """Base exception for invalid numeric inputs."""

    def __init__(
        self,
        message: str,
        exit_code: int = 1,
        detail: Optional[dict[str, Any]] = None,
    ):
        super().__init__(message, exit_code, detail)


class InvalidDomainException(ComputationException):
    """Input lies outside the domain of a transform or metric."""

    def __init__(self, operation: str, value: Any):
        super().__init__(
            message=f"{operation}: value {value!r} outside domain",
            detail={"operation": operation, "value": repr(value)},
        )


class NegativeAgeException(ComputationException):
    """Upload date lies after the reference date."""

    def __init__(self, upload_date: Any, reference_date: Any):
        super().__init__(
            message=f"Upload date {upload_date} is after reference date {reference_date}",
            detail={"upload_date": str(upload_date), "reference_date": str(reference_date)},
        )


class EmptyInputException(ComputationException):
    """Operation received an empty input."""

    def __init__(self, operation: str):
        super().__init__(
            message=f"{operation}: empty input",
            detail={"operation": operation},
        )


class LengthMismatchException(ComputationException):
    """Paired vectors have different lengths."""

    def __init__(self, left: int, right: int):
        super().__init__(
            message=f"Length mismatch: {left} vs {right}",
            detail={"left": left, "right": right},
        )


class ConstantTruthException(ComputationException):
    """R^2 is undefined for a constant truth vector."""

    def __init__(self, message: str = "R2 undefined: truth has zero variance"):
        super().__init__(message=message)


# Model exceptions


class ModelException(EngagementException):
    """Base exception for model fitting and prediction errors."""

    def __init__(
        self,
        message: str,
        exit_code: int = 1,
        detail: Optional[dict[str, Any]] = None,
    ):
        super().__init__(message, exit_code, detail)


class TooFewRowsException(ModelException):
    """Not enough rows for the requested fit or split."""

    def __init__(self, n_rows: int, required: int):
        super().__init__(
            message=f"Too few rows: {n_rows} (need at least {required})",
            detail={"n_rows": n_rows, "required": required},
        )


class NonFiniteTargetException(ModelException):
    """Target vector contains NaN or infinite values."""

    def __init__(self, n_bad: int):
        super().__init__(
            message=f"Target contains {n_bad} non-finite values",
            detail={"n_bad": n_bad},
        )


class DimensionMismatchException(ModelException):
    """Matrix shape does not match what the model expects."""

    def __init__(self, expected: Any, actual: Any, what: str = "columns"):
        super().__init__(
            message=f"Dimension mismatch in {what}: expected {expected}, got {actual}",
            detail={"what": what, "expected": repr(expected), "actual": repr(actual)},
        )


class HistogramCheckException(ModelException):
    """Subtracted and directly built histograms disagree."""

    def __init__(self, max_error: float):
        super().__init__(
            message=f"Histogram subtraction check failed (max error {max_error:.3e})",
            detail={"max_error": max_error},
        )


# Persistence exceptions


class PersistenceException(EngagementException):
    """Base exception for model file errors."""

    def __init__(
        self,
        message: str,
        exit_code: int = 1,
        detail: Optional[dict[str, Any]] = None,
    ):
        super().__init__(message, exit_code, detail)


class ModelFormatException(PersistenceException):
    """Model file declares an unknown format version."""

    def __init__(self, version: Any):
        super().__init__(
            message=f"Unsupported model format version: {version!r}",
            detail={"format_version": repr(version)},
        )


class ModelSchemaException(PersistenceException):
    """Model file is structurally invalid."""

    def __init__(self, reason: str):
        super().__init__(
            message=f"Invalid model file: {reason}",
            detail={"reason": reason},
        )


class ModelIOException(PersistenceException):
    """Model file could not be read or written."""

    def __init__(self, path: str, reason: str):
        super().__init__(
            message=f"I/O error on {path}: {reason}",
            detail={"path": path, "reason": reason},
        )


# Configuration exceptions


class ConfigurationException(EngagementException):
    """Base exception for configuration and usage errors."""

    def __init__(
        self,
        message: str,
        exit_code: int = 2,
        detail: Optional[dict[str, Any]] = None,
    ):
        super().__init__(message, exit_code, detail)


class MissingConfigException(ConfigurationException):
    """Required configuration value is missing."""

    def __init__(self, config_key: str):
        super().__init__(
            message=f"Missing required configuration: {config_key}",
            detail={"config_key": config_key},
        )


class InvalidConfigException(ConfigurationException):
    """Configuration value is invalid."""

    def __init__(self, config_key: str, reason: str):
        super().__init__(
            message=f"Invalid configuration: {config_key} - {reason}",
            detail={"config_key": config_key, "reason": reason},
        )
