"""
Tabular Service - Ingestion Layer

This module loads song records from CSV, applies row-wise deletion of missing
cells, filters unusable rows, and splits tables for training and evaluation.

Blank cells mean "missing" and drop the row; malformed non-blank cells are errors.
"""

import logging
import math
import re
from datetime import date, datetime
from pathlib import Path

import numpy as np
import pandas as pd

from engagement.exceptions import (
    CellParseException,
    EmptyAfterCleanException,
    InvalidConfigException,
    MissingColumnException,
    TooFewRowsException,
)
from engagement.schemas.records import ColumnSchema, RawRecord, RawTable
from engagement.utils.io import atomic_write_text

logger = logging.getLogger(__name__)

_ISO_DATE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
_COMPACT_DATE = re.compile(r"^\d{8}$")


class _MissingCell(Exception):
    """Internal signal: the row has a blank mapped cell."""


def _parse_count(raw: str, row: int, column: str) -> int:
    text = raw.strip()
    if not text:
        raise _MissingCell
    try:
        value = int(text)
    except ValueError:
        # Exports often write counts as "1200.0"
        try:
            as_float = float(text)
        except ValueError:
            raise CellParseException(row, column, raw, "not a number") from None
        if not math.isfinite(as_float) or not as_float.is_integer():
            raise CellParseException(row, column, raw, "not an integer count") from None
        value = int(as_float)
    if value < 0:
        raise CellParseException(row, column, raw, "negative count")
    return value


def _parse_score(raw: str, row: int, column: str) -> float:
    text = raw.strip()
    if not text:
        raise _MissingCell
    try:
        value = float(text)
    except ValueError:
        raise CellParseException(row, column, raw, "not a number") from None
    if not math.isfinite(value):
        raise CellParseException(row, column, raw, "not finite")
    return value


def _parse_date(raw: str, row: int, column: str) -> date:
    text = raw.strip()
    if not text:
        raise _MissingCell
    try:
        if _ISO_DATE.match(text):
            return date.fromisoformat(text)
        if _COMPACT_DATE.match(text):
            return datetime.strptime(text, "%Y%m%d").date()  # noqa: DTZ007
    except ValueError:
        raise CellParseException(row, column, raw, "invalid calendar date") from None
    raise CellParseException(row, column, raw, "expected YYYY-MM-DD or YYYYMMDD")


class TabularService:
    """
    Service class for record ingestion and row-level cleaning.

    All methods are pure functions over immutable tables.
    """

    @staticmethod
    def load_csv(
        path: Path | str,
        schema: ColumnSchema | None = None,
        require_engagement: bool = True,
        read_engagement: bool = True,
    ) -> RawTable:
        """
        Parse a CSV file into a RawTable.

        Args:
            path: CSV file (UTF-8, comma-separated, one header row)
            schema: Column-name mapping (defaults to the standard export names)
            require_engagement: Whether Likes and Comments columns are required.
                When False and the columns are absent, records carry no counts.
            read_engagement: Whether Likes and Comments cells are parsed at all.
                When False the columns are ignored even if present, so blank or zero
                counts neither drop nor filter a row.

        Returns:
            RawTable: Parsed records plus the row numbers dropped for missing cells

        Raises:
            MissingColumnException: A required column is absent from the header
            CellParseException: A non-blank mapped cell is malformed

        Example:
            table = TabularService.load_csv("songs.csv")
            print(len(table), table.n_dropped)
        """
        schema = schema or ColumnSchema()
        frame = pd.read_csv(
            path,
            dtype=str,
            keep_default_na=False,
            encoding="utf-8",
        ).fillna("")
        header = set(frame.columns)

        for column in schema.required_columns(require_engagement):
            if column not in header:
                raise MissingColumnException(column)

        has_counts = read_engagement and schema.likes in header and schema.comments in header
        has_track = schema.track in header

        records: list[RawRecord] = []
        kept_rows: list[int] = []
        dropped_rows: list[int] = []

        for position, row in enumerate(frame.to_dict(orient="records"), start=1):
            try:
                views = _parse_count(row[schema.views], position, schema.views)
                likes = comments = None
                if has_counts:
                    likes = _parse_count(row[schema.likes], position, schema.likes)
                    comments = _parse_count(row[schema.comments], position, schema.comments)
                upload_date = _parse_date(row[schema.upload_date], position, schema.upload_date)
                emotions = tuple(
                    _parse_score(row[column], position, column) for column in schema.emotions
                )
            except _MissingCell:
                dropped_rows.append(position)
                continue

            track_id = row[schema.track].strip() or None if has_track else None
            records.append(
                RawRecord(
                    track_id=track_id,
                    upload_date=upload_date,
                    views=views,
                    likes=likes,
                    comments=comments,
                    emotions=emotions,
                )
            )
            kept_rows.append(position)

        logger.info(
            "Loaded CSV",
            extra={
                "path": str(path),
                "n_records": len(records),
                "n_dropped_missing": len(dropped_rows),
            },
        )

        return RawTable(
            records=tuple(records),
            source_row_indices=tuple(kept_rows),
            dropped_row_indices=tuple(dropped_rows),
        )

    @staticmethod
    def clean(table: RawTable) -> RawTable:
        """
        Keep only records with views >= 1 and likes >= 1.

        Comments of zero are kept. Unlabeled records are filtered on views only.

        Args:
            table: Parsed table

        Returns:
            RawTable: Surviving records in their original order

        Raises:
            EmptyAfterCleanException: If no record survives
        """
        keep = [
            i
            for i, record in enumerate(table.records)
            if record.views >= 1 and (record.likes is None or record.likes >= 1)
        ]
        if not keep:
            raise EmptyAfterCleanException(len(table))

        removed = len(table) - len(keep)
        if removed:
            logger.info(
                "Removed records with zero views or likes",
                extra={"n_removed": removed, "n_kept": len(keep)},
            )
        return table.subset(keep)

    @staticmethod
    def train_test_split(
        table: RawTable, train_fraction: float, seed: int
    ) -> tuple[RawTable, RawTable]:
        """
        Seeded random split; each side keeps input order.

        Args:
            table: Cleaned table
            train_fraction: Share of rows assigned to training, in (0, 1)
            seed: Random seed

        Returns:
            tuple[RawTable, RawTable]: (train, test), both non-empty

        Raises:
            InvalidConfigException: If the fraction is outside (0, 1)
            TooFewRowsException: If fewer than two records are available
        """
        if not 0.0 < train_fraction < 1.0:
            raise InvalidConfigException("split", "train fraction must be in (0, 1)")
        n = len(table)
        if n < 2:
            raise TooFewRowsException(n, 2)

        n_train = min(max(round(train_fraction * n), 1), n - 1)
        permutation = np.random.default_rng(seed).permutation(n)
        train_positions = sorted(int(i) for i in permutation[:n_train])
        test_positions = sorted(int(i) for i in permutation[n_train:])
        return table.subset(train_positions), table.subset(test_positions)

    @staticmethod
    def write_csv(table: RawTable, path: Path | str, schema: ColumnSchema | None = None) -> None:
        """
        Serialize records in the input schema so that load_csv reproduces them.

        Reals are written in shortest round-trip form; dates as YYYY-MM-DD.

        Args:
            table: Records to write
            path: Destination file (written atomically)
            schema: Column-name mapping
        """
        schema = schema or ColumnSchema()
        columns = [schema.track, schema.views, schema.likes, schema.comments, schema.upload_date]
        columns += list(schema.emotions)

        def cell(value: object) -> str:
            if value is None:
                return ""
            if isinstance(value, float):
                return repr(value)
            return str(value)

        rows = [
            [
                cell(record.track_id),
                cell(record.views),
                cell(record.likes),
                cell(record.comments),
                record.upload_date.isoformat(),
                *(cell(score) for score in record.emotions),
            ]
            for record in table.records
        ]
        frame = pd.DataFrame(rows, columns=columns, dtype=str)
        atomic_write_text(Path(path), frame.to_csv(index=False, lineterminator="\n"))
