"""
Tests for TabularService ingestion logic.

These tests verify CSV parsing, row-wise deletion of missing cells, the
views/likes filter, the seeded train/test split and CSV serialization.
"""

from collections.abc import Callable
from datetime import date
from pathlib import Path

import pytest

from engagement.exceptions import (
    CellParseException,
    EmptyAfterCleanException,
    InvalidConfigException,
    MissingColumnException,
    TooFewRowsException,
)
from engagement.schemas.records import EMOTION_NAMES, ColumnSchema, RawTable
from engagement.services.tabular_service import TabularService
from tests.factories import CSV_HEADER, csv_row, make_record, make_table


class TestLoadCsv:
    """Test suite for TabularService.load_csv."""

    def test_all_valid_rows(self, write_csv: Callable[..., Path]) -> None:
        """Test that a fully valid file loads every row."""
        path = write_csv([csv_row("a"), csv_row("b"), csv_row("c")])

        table = TabularService.load_csv(path)

        assert len(table) == 3
        assert table.n_dropped == 0
        assert table.source_row_indices == (1, 2, 3)
        assert [r.track_id for r in table.records] == ["a", "b", "c"]
        assert table.records[0].views == 1000
        assert table.records[0].likes == 100
        assert table.records[0].comments == 10
        assert table.records[0].upload_date == date(2021, 3, 15)
        assert table.records[0].emotions == (0.5,) * 10

    def test_blank_cell_drops_row(self, write_csv: Callable[..., Path]) -> None:
        """Test that a blank mapped cell removes the whole row."""
        path = write_csv([csv_row("a"), csv_row("b", views=""), csv_row("c")])

        table = TabularService.load_csv(path)

        assert len(table) == 2
        assert table.n_dropped == 1
        assert table.dropped_row_indices == (2,)
        assert table.source_row_indices == (1, 3)

    def test_blank_emotion_drops_row(self, write_csv: Callable[..., Path]) -> None:
        """Test that a blank emotion score also drops the row."""
        emotions = ["0.5"] * 9 + [" "]
        path = write_csv([csv_row("a", emotions=emotions), csv_row("b")])

        table = TabularService.load_csv(path)

        assert table.dropped_row_indices == (1,)
        assert [r.track_id for r in table.records] == ["b"]

    def test_missing_column(self, write_csv: Callable[..., Path]) -> None:
        """Test that a header without Upload date is rejected."""
        header = [c for c in CSV_HEADER if c != "Upload date"]
        row = csv_row()
        del row[4]
        path = write_csv([row], header=header)

        with pytest.raises(MissingColumnException) as exc_info:
            TabularService.load_csv(path)

        assert exc_info.value.column == "Upload date"
        assert exc_info.value.exit_code == 1

    def test_malformed_count(self, write_csv: Callable[..., Path]) -> None:
        """Test that a non-numeric count is an error, not a missing value."""
        path = write_csv([csv_row(), csv_row(likes="lots")])

        with pytest.raises(CellParseException) as exc_info:
            TabularService.load_csv(path)

        assert exc_info.value.row == 2
        assert exc_info.value.column == "Likes"

    def test_negative_count(self, write_csv: Callable[..., Path]) -> None:
        """Test that negative counts are rejected."""
        path = write_csv([csv_row(comments="-3")])

        with pytest.raises(CellParseException):
            TabularService.load_csv(path)

    def test_float_formatted_count(self, write_csv: Callable[..., Path]) -> None:
        """Test that integral counts written as reals are accepted."""
        path = write_csv([csv_row(views="1200.0")])

        table = TabularService.load_csv(path)

        assert table.records[0].views == 1200

    def test_fractional_count(self, write_csv: Callable[..., Path]) -> None:
        """Test that fractional counts are rejected."""
        path = write_csv([csv_row(views="12.5")])

        with pytest.raises(CellParseException):
            TabularService.load_csv(path)

    def test_compact_date(self, write_csv: Callable[..., Path]) -> None:
        """Test that YYYYMMDD dates are accepted."""
        path = write_csv([csv_row(upload_date="20210315")])

        table = TabularService.load_csv(path)

        assert table.records[0].upload_date == date(2021, 3, 15)

    def test_invalid_calendar_date(self, write_csv: Callable[..., Path]) -> None:
        """Test that impossible dates are rejected."""
        path = write_csv([csv_row(upload_date="2021-02-30")])

        with pytest.raises(CellParseException):
            TabularService.load_csv(path)

    def test_non_finite_score(self, write_csv: Callable[..., Path]) -> None:
        """Test that non-finite emotion scores are rejected."""
        path = write_csv([csv_row(emotions=["nan"] + ["0.5"] * 9)])

        with pytest.raises(CellParseException):
            TabularService.load_csv(path)

    def test_unlabeled_input(self, write_csv: Callable[..., Path]) -> None:
        """Test loading a file without Likes and Comments columns."""
        header = ["Track", "Views", "Upload date", *EMOTION_NAMES]
        path = write_csv([["x", "500", "2020-01-01", *["0.1"] * 10]], header=header)

        with pytest.raises(MissingColumnException):
            TabularService.load_csv(path)

        table = TabularService.load_csv(path, require_engagement=False)
        assert len(table) == 1
        assert table.records[0].likes is None
        assert table.records[0].comments is None
        assert not table.is_labeled

    def test_engagement_columns_ignored(self, write_csv: Callable[..., Path]) -> None:
        """Test that unread Likes and Comments cells neither drop nor filter rows."""
        path = write_csv(
            [
                csv_row(track="blank", likes="", comments=""),
                csv_row(track="zero", likes="0", comments="0"),
                csv_row(track="bad", likes="many"),
            ]
        )

        table = TabularService.load_csv(path, require_engagement=False, read_engagement=False)
        cleaned = TabularService.clean(table)

        assert [r.track_id for r in cleaned.records] == ["blank", "zero", "bad"]
        assert all(r.likes is None and r.comments is None for r in cleaned.records)
        assert table.n_dropped == 0

    def test_blank_track_id(self, write_csv: Callable[..., Path]) -> None:
        """Test that a blank track cell yields no track id but keeps the row."""
        path = write_csv([csv_row(track="")])

        table = TabularService.load_csv(path)

        assert len(table) == 1
        assert table.records[0].track_id is None

    def test_remapped_columns(self, write_csv: Callable[..., Path]) -> None:
        """Test loading with custom header names."""
        header = ["Track", "View Count", "Likes", "Comments Number", "Published", *EMOTION_NAMES]
        path = write_csv([csv_row()], header=header)
        schema = ColumnSchema().remap({"views": "View Count", "upload_date": "Published"})

        table = TabularService.load_csv(path, schema)

        assert table.records[0].views == 1000
        assert table.records[0].upload_date == date(2021, 3, 15)


class TestClean:
    """Test suite for TabularService.clean."""

    def test_filters_zero_views_and_likes(self) -> None:
        """Test that only rows with views >= 1 and likes >= 1 survive."""
        table = make_table(
            [
                make_record(views=100, likes=5, track_id="keep"),
                make_record(views=0, likes=3),
                make_record(views=50, likes=0),
            ]
        )

        cleaned = TabularService.clean(table)

        assert [r.track_id for r in cleaned.records] == ["keep"]
        assert cleaned.source_row_indices == (1,)

    def test_all_positive_is_identity(self) -> None:
        """Test that a table with positive counts is unchanged."""
        table = make_table([make_record(views=v) for v in (10, 20, 30)])

        assert TabularService.clean(table) == table

    def test_zero_comments_retained(self) -> None:
        """Test that zero comments do not remove a row."""
        table = make_table([make_record(views=10, likes=2, comments=0)])

        assert len(TabularService.clean(table)) == 1

    def test_idempotent(self) -> None:
        """Test that cleaning a cleaned table changes nothing."""
        table = make_table(
            [
                make_record(views=100, likes=5),
                make_record(views=0, likes=3),
                make_record(views=50, likes=0),
                make_record(views=7, likes=1, comments=0),
            ]
        )

        once = TabularService.clean(table)

        assert TabularService.clean(once) == once
        assert once.source_row_indices == (1, 4)

    def test_empty_after_clean(self) -> None:
        """Test that removing every row is an error."""
        table = make_table([make_record(views=0), make_record(views=0)])

        with pytest.raises(EmptyAfterCleanException):
            TabularService.clean(table)


class TestTrainTestSplit:
    """Test suite for TabularService.train_test_split."""

    def test_partition(self, small_synth_table: RawTable) -> None:
        """Test that the split is a disjoint cover preserving input order."""
        train, test = TabularService.train_test_split(small_synth_table, 0.8, seed=42)

        assert len(train) == 96
        assert len(test) == 24
        assert set(train.source_row_indices).isdisjoint(test.source_row_indices)
        assert set(train.source_row_indices) | set(test.source_row_indices) == set(
            small_synth_table.source_row_indices
        )
        assert list(train.source_row_indices) == sorted(train.source_row_indices)
        assert list(test.source_row_indices) == sorted(test.source_row_indices)

    def test_deterministic(self, small_synth_table: RawTable) -> None:
        """Test that the same seed gives the same split."""
        first = TabularService.train_test_split(small_synth_table, 0.8, seed=3)
        second = TabularService.train_test_split(small_synth_table, 0.8, seed=3)
        other = TabularService.train_test_split(small_synth_table, 0.8, seed=4)

        assert first == second
        assert first[0].source_row_indices != other[0].source_row_indices

    def test_both_sides_non_empty(self) -> None:
        """Test that extreme fractions still leave one row on each side."""
        table = make_table([make_record(track_id=str(i)) for i in range(3)])

        train, test = TabularService.train_test_split(table, 0.99, seed=0)

        assert len(train) == 2
        assert len(test) == 1

    def test_invalid_fraction(self, small_synth_table: RawTable) -> None:
        """Test that fractions outside (0, 1) are rejected."""
        with pytest.raises(InvalidConfigException):
            TabularService.train_test_split(small_synth_table, 1.0, seed=0)

    def test_too_few_rows(self) -> None:
        """Test that a single row cannot be split."""
        with pytest.raises(TooFewRowsException):
            TabularService.train_test_split(make_table([make_record()]), 0.5, seed=0)


class TestWriteCsv:
    """Test suite for TabularService.write_csv."""

    def test_round_trip(self, small_synth_table: RawTable, tmp_path: Path) -> None:
        """Test that load_csv reproduces written records exactly."""
        path = tmp_path / "synth.csv"

        TabularService.write_csv(small_synth_table, path)
        loaded = TabularService.load_csv(path)

        assert loaded.records == small_synth_table.records
        assert loaded.source_row_indices == small_synth_table.source_row_indices

    def test_header(self, tmp_path: Path) -> None:
        """Test the written header follows the column schema."""
        path = tmp_path / "one.csv"

        TabularService.write_csv(make_table([make_record()]), path)

        assert path.read_text(encoding="utf-8").splitlines()[0] == ",".join(CSV_HEADER)
