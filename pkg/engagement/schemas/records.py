"""
Pydantic schemas for raw song records and the CSV column layout.

These schemas define the structure and validation rules for ingested data,
so every record that reaches feature engineering is well-formed.
"""

import math
from datetime import date

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

EMOTION_NAMES: tuple[str, ...] = (
    "Valence",
    "Arousal",
    "Tension",
    "Atmospheric",
    "Happy",
    "Dark",
    "Sad",
    "Angry",
    "Sensual",
    "Sentimental",
)


class ColumnSchema(BaseModel):
    """
    Mapping from record fields to CSV header names.

    Defaults match the common export layout; any entry can be remapped.

    Example:
        ColumnSchema(views="View Count", upload_date="Published")
    """

    model_config = ConfigDict(frozen=True)

    track: str = Field(default="Track", min_length=1)
    upload_date: str = Field(default="Upload date", min_length=1)
    views: str = Field(default="Views", min_length=1)
    likes: str = Field(default="Likes", min_length=1)
    comments: str = Field(default="Comments Number", min_length=1)
    emotions: tuple[str, ...] = EMOTION_NAMES

    @field_validator("emotions")
    @classmethod
    def validate_emotions(cls, v: tuple[str, ...]) -> tuple[str, ...]:
        """Ensure exactly ten emotion columns are mapped."""
        if len(v) != len(EMOTION_NAMES):
            raise ValueError(f"Expected {len(EMOTION_NAMES)} emotion columns, got {len(v)}")
        return v

    def required_columns(self, require_engagement: bool = True) -> list[str]:
        """Header names that must be present, in checking order."""
        columns = [self.views]
        if require_engagement:
            columns += [self.likes, self.comments]
        columns.append(self.upload_date)
        columns += list(self.emotions)
        return columns

    def remap(self, mapping: dict[str, str]) -> "ColumnSchema":
        """
        Return a copy with some header names replaced.

        Keys are field names (``views``, ``likes``, ...) or emotion names
        (``Valence``, ...); values are the header names found in the file.
        """
        emotions = tuple(
            mapping.get(name, column) for name, column in zip(EMOTION_NAMES, self.emotions)
        )
        updates: dict[str, object] = {
            key: value for key, value in mapping.items() if key in type(self).model_fields
        }
        updates["emotions"] = emotions
        return self.model_validate({**self.model_dump(), **updates})


class RawRecord(BaseModel):
    """
    One parsed song record.

    ``likes`` and ``comments`` are ``None`` only for unlabeled prediction input.
    """

    model_config = ConfigDict(frozen=True)

    track_id: str | None = None
    upload_date: date
    views: int = Field(ge=0)
    likes: int | None = Field(default=None, ge=0)
    comments: int | None = Field(default=None, ge=0)
    emotions: tuple[float, ...]

    @field_validator("emotions")
    @classmethod
    def validate_emotions(cls, v: tuple[float, ...]) -> tuple[float, ...]:
        """Ensure ten finite emotion scores."""
        if len(v) != len(EMOTION_NAMES):
            raise ValueError(f"Expected {len(EMOTION_NAMES)} emotion scores, got {len(v)}")
        if not all(math.isfinite(score) for score in v):
            raise ValueError("Emotion scores must be finite")
        return v

    @property
    def is_labeled(self) -> bool:
        """True when both engagement counts are present."""
        return self.likes is not None and self.comments is not None


class RawTable(BaseModel):
    """
    Ordered collection of parsed records.

    ``source_row_indices`` holds the 1-based data row number (header excluded) of
    each record; ``dropped_row_indices`` holds the rows removed by row-wise deletion
    of missing cells at load time.
    """

    model_config = ConfigDict(frozen=True)

    records: tuple[RawRecord, ...]
    source_row_indices: tuple[int, ...]
    dropped_row_indices: tuple[int, ...] = ()

    @model_validator(mode="after")
    def validate_indices(self) -> "RawTable":
        """Row indices align with records and strictly increase."""
        if len(self.records) != len(self.source_row_indices):
            raise ValueError("records and source_row_indices differ in length")
        indices = self.source_row_indices
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ValueError("source_row_indices must be strictly increasing")
        return self

    def __len__(self) -> int:
        return len(self.records)

    @property
    def n_dropped(self) -> int:
        """Number of rows removed for missing values."""
        return len(self.dropped_row_indices)

    @property
    def is_labeled(self) -> bool:
        """True when every record carries likes and comments."""
        return all(record.is_labeled for record in self.records)

    def subset(self, positions: list[int]) -> "RawTable":
        """Records at the given positions, in the given order."""
        return RawTable(
            records=tuple(self.records[i] for i in positions),
            source_row_indices=tuple(self.source_row_indices[i] for i in positions),
            dropped_row_indices=self.dropped_row_indices,
        )
