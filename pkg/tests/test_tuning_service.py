"""
Tests for TuningService successive-halving search.

These tests verify candidate sampling, fold construction, cross-validated
scoring, the rung schedule and survivor selection.
"""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from engagement.exceptions import InvalidConfigException, TooFewRowsException
from engagement.schemas.params import GbtParams
from engagement.schemas.pipeline import FEATURE_ORDER, PipelineConfig, PipelineState
from engagement.schemas.synth import SynthConfig
from engagement.schemas.tuning import HalvingConfig, ParamSpace, SearchResult
from engagement.services.feature_service import DesignMatrices, FeatureService
from engagement.services.synth_service import SynthService
from engagement.services.tuning_service import TuningService

TINY_SPACE = ParamSpace(
    learning_rate=(0.05, 0.3),
    max_leaf_nodes=(4, 8),
    min_samples_leaf=(5, 10),
    l2_regularization=(1e-3, 1.0),
)


@pytest.fixture(scope="module")
def tiny_design() -> tuple[DesignMatrices, PipelineState]:
    """80-row synthetic design for fast searches."""
    table = SynthService.generate(SynthConfig(n_rows=80, seed=5))
    return FeatureService.build_design(table, PipelineConfig())


def _assert_survivor_monotonicity(result: SearchResult, factor: int) -> None:
    for summary in result.schedule[1:]:
        previous = result.rung_trials(summary.rung - 1)
        ranked = sorted(previous, key=lambda t: (-t.score, t.candidate_index))
        expected = sorted(t.candidate_index for t in ranked[: len(previous) // factor])
        survivors = [t.candidate_index for t in result.rung_trials(summary.rung)]
        assert survivors == expected
        worst_kept = min(t.score for t in previous if t.candidate_index in expected)
        dropped = [t.score for t in previous if t.candidate_index not in expected]
        assert all(score <= worst_kept for score in dropped)


class TestSampleCandidates:
    """Test suite for TuningService.sample_candidates."""

    def test_degenerate_space(self) -> None:
        """Test that single-point ranges give exactly that point."""
        space = ParamSpace(
            learning_rate=(0.05, 0.05),
            max_leaf_nodes=(7,),
            min_samples_leaf=(3,),
            l2_regularization=(0.5, 0.5),
        )

        (candidate,) = TuningService.sample_candidates(space, 1, seed=0)

        assert candidate.learning_rate == 0.05
        assert candidate.max_leaf_nodes == 7
        assert candidate.min_samples_leaf == 3
        assert candidate.l2_regularization == 0.5

    def test_deterministic_and_within_bounds(self) -> None:
        """Test seeding and range membership."""
        first = TuningService.sample_candidates(TINY_SPACE, 50, seed=1)
        second = TuningService.sample_candidates(TINY_SPACE, 50, seed=1)

        assert first == second
        for candidate in first:
            assert 0.05 <= candidate.learning_rate <= 0.3
            assert 1e-3 <= candidate.l2_regularization <= 1.0
            assert candidate.max_leaf_nodes in (4, 8)
            assert candidate.min_samples_leaf in (5, 10)

    def test_choices_are_uniform(self) -> None:
        """Test that every choice is drawn about equally often."""
        candidates = TuningService.sample_candidates(ParamSpace(), 4000, seed=2)

        counts = np.unique([c.max_leaf_nodes for c in candidates], return_counts=True)[1]

        assert counts.size == 4
        assert np.all(np.abs(counts / 4000 - 0.25) < 0.03)

    def test_log_uniform_median(self) -> None:
        """Test that the learning rate is uniform on the log scale."""
        candidates = TuningService.sample_candidates(ParamSpace(), 4000, seed=3)

        median = float(np.median([c.learning_rate for c in candidates]))

        assert median == pytest.approx(math.sqrt(0.01 * 0.3), rel=0.1)

    def test_base_fields_are_kept(self) -> None:
        """Test that non-searched fields come from the base parameters."""
        base = GbtParams(seed=99, n_iter_no_change=4)

        candidates = TuningService.sample_candidates(TINY_SPACE, 3, seed=0, base=base)

        assert all(c.seed == 99 and c.n_iter_no_change == 4 for c in candidates)


class TestKfoldSplit:
    """Test suite for TuningService.kfold_split."""

    def test_even_folds(self) -> None:
        """Test five folds of two rows."""
        folds = TuningService.kfold_split(10, 5, seed=0)

        assert [fold.size for fold in folds] == [2, 2, 2, 2, 2]

    def test_remainder_rule(self) -> None:
        """Test that the first n mod k folds get the extra row."""
        folds = TuningService.kfold_split(7, 3, seed=0)

        assert [fold.size for fold in folds] == [3, 2, 2]
        assert sorted(np.concatenate(folds).tolist()) == list(range(7))

    def test_deterministic(self) -> None:
        """Test that the same seed gives the same folds."""
        first = TuningService.kfold_split(50, 4, seed=8)
        second = TuningService.kfold_split(50, 4, seed=8)

        for a, b in zip(first, second):
            np.testing.assert_array_equal(a, b)

    def test_errors(self) -> None:
        """Test fold-count validation."""
        with pytest.raises(TooFewRowsException):
            TuningService.kfold_split(3, 5, seed=0)
        with pytest.raises(InvalidConfigException):
            TuningService.kfold_split(10, 1, seed=0)


class TestCvScore:
    """Test suite for TuningService.cv_score."""

    def test_score_is_non_positive_and_deterministic(
        self, tiny_design: tuple[DesignMatrices, PipelineState]
    ) -> None:
        """Test the sign and reproducibility of the score."""
        design, state = tiny_design
        folds = TuningService.kfold_split(design.n_rows, 3, seed=0)
        candidate = GbtParams(max_leaf_nodes=8, min_samples_leaf=5)

        first = TuningService.cv_score(candidate, design, folds, 10, state)
        second = TuningService.cv_score(candidate, design, folds, 10, state)

        assert first <= 0.0
        assert first == second

    def test_larger_step_wins_at_one_iteration(self) -> None:
        """Test that lr 0.3 beats lr 0.01 with a single tree on noiseless data."""
        table = SynthService.generate(
            SynthConfig(n_rows=200, seed=42, like_noise_sd=0.0, comment_noise_sd=0.0)
        )
        design, state = FeatureService.build_design(table, PipelineConfig())
        folds = TuningService.kfold_split(design.n_rows, 3, seed=0)

        slow = TuningService.cv_score(GbtParams(learning_rate=0.01), design, folds, 1, state)
        fast = TuningService.cv_score(GbtParams(learning_rate=0.3), design, folds, 1, state)

        assert fast > slow


class TestSchedule:
    """Test suite for TuningService.schedule."""

    def test_schedule_arithmetic(self) -> None:
        """Test sizes 9/3/1 at resources 10/30/90."""
        config = HalvingConfig(n_candidates=9, factor=3, min_resource=10, max_resource=90)

        plan = TuningService.schedule(config)

        assert [(r.n_candidates, r.resource) for r in plan] == [(9, 10), (3, 30), (1, 90)]

    def test_resource_is_capped(self) -> None:
        """Test that resources never exceed max_resource."""
        config = HalvingConfig(n_candidates=27, factor=3, min_resource=10, max_resource=50)

        plan = TuningService.schedule(config)

        assert [(r.n_candidates, r.resource) for r in plan] == [(27, 10), (9, 30)]

    def test_rung_count_stops_at_one_candidate(self) -> None:
        """Test that a rung with no candidates is never planned."""
        config = HalvingConfig(n_candidates=4, factor=2, min_resource=1, max_resource=1024)

        plan = TuningService.schedule(config)

        assert [r.n_candidates for r in plan] == [4, 2, 1]


class TestHalvingSearch:
    """Test suite for TuningService.halving_search."""

    @pytest.mark.slow
    @pytest.mark.parametrize(
        ("n_candidates", "factor", "max_resource"),
        [(9, 3, 45), (16, 2, 80), (64, 3, 135)],
    )
    def test_schedule_law(
        self,
        tiny_design: tuple[DesignMatrices, PipelineState],
        n_candidates: int,
        factor: int,
        max_resource: int,
    ) -> None:
        """Test realized rung sizes, resources and survivor selection."""
        design, state = tiny_design
        config = HalvingConfig(
            n_candidates=n_candidates,
            factor=factor,
            min_resource=5,
            max_resource=max_resource,
            cv_folds=2,
            seed=1,
        )

        result = TuningService.halving_search(design, TINY_SPACE, config, state)

        size, resource, rung = n_candidates, 5, 0
        while size >= 1 and resource <= max_resource:
            trials = result.rung_trials(rung)
            assert len(trials) == size
            assert all(t.resource == resource for t in trials)
            size, resource, rung = size // factor, resource * factor, rung + 1
        assert len(result.schedule) == rung
        _assert_survivor_monotonicity(result, factor)

        final = result.schedule[-1]
        assert result.best_params.max_iter == final.resource
        assert result.best_params.early_stopping
        assert result.best_index in {t.candidate_index for t in result.rung_trials(final.rung)}

    def test_planted_tree_search_improves_on_first_rung(
        self, tiny_design: tuple[DesignMatrices, PipelineState]
    ) -> None:
        """Test that the best final-rung score is at least the median first-rung score."""
        _, state = tiny_design
        rng = np.random.default_rng(42)
        X = rng.uniform(size=(150, len(FEATURE_ORDER)))
        log_cr = 0.01 + 0.02 * (X[:, 0] > 0.5) + 0.01 * ((X[:, 0] > 0.5) & (X[:, 1] > 0.3))
        log_lr = 0.05 + 0.1 * (X[:, 2] > 0.5) + 0.05 * ((X[:, 2] > 0.5) & (X[:, 3] > 0.6))
        Y = np.column_stack([log_cr, log_lr])
        views = rng.integers(1_000, 100_000, size=150).astype(np.float64)
        planted = DesignMatrices(
            X=X,
            views=views,
            feature_order=FEATURE_ORDER,
            Y=Y,
            true_counts=np.expm1(Y) * views[:, None],
        )
        config = HalvingConfig(
            n_candidates=9, factor=3, min_resource=5, max_resource=45, cv_folds=2, seed=42
        )

        result = TuningService.halving_search(planted, TINY_SPACE, config, state)

        first = [t.score for t in result.rung_trials(0)]
        assert result.best_score >= float(np.median(first))
        assert result.schedule[-1].resource == 45

    def test_failed_candidates_score_negative_infinity(
        self,
        tiny_design: tuple[DesignMatrices, PipelineState],
        monkeypatch: pytest.MonkeyPatch,
        tmp_path: Path,
    ) -> None:
        """Test that a failing candidate is logged with -inf and eliminated."""
        design, state = tiny_design
        config = HalvingConfig(
            n_candidates=9, factor=3, min_resource=2, max_resource=18, cv_folds=2, seed=4
        )
        candidates = TuningService.sample_candidates(
            TINY_SPACE, 9, config.seed, GbtParams(seed=config.seed)
        )
        bad = candidates[0]

        def fake_cv_score(
            candidate: GbtParams,
            design: DesignMatrices,
            folds: list[np.ndarray],
            resource: int,
            pipeline: PipelineState,
        ) -> float:
            if candidate == bad:
                raise RuntimeError("boom")
            return -candidate.learning_rate

        monkeypatch.setattr(TuningService, "cv_score", staticmethod(fake_cv_score))

        result = TuningService.halving_search(design, TINY_SPACE, config, state)

        first_rung = {t.candidate_index: t.score for t in result.rung_trials(0)}
        assert first_rung[0] == -math.inf
        assert 0 not in {t.candidate_index for t in result.rung_trials(1)}
        expected_best = max(range(1, 9), key=lambda i: -candidates[i].learning_rate)
        assert result.best_index == expected_best

        path = tmp_path / "trials.jsonl"
        TuningService.write_trial_log(result, path)
        rows = [json.loads(line) for line in path.read_text().splitlines()]
        assert len(rows) == len(result.trial_log)
        failed = [row for row in rows if row["failed"]]
        assert len(failed) == 1
        assert failed[0]["candidate_index"] == 0
        assert failed[0]["score"] is None

    def test_ties_prefer_lower_index(
        self,
        tiny_design: tuple[DesignMatrices, PipelineState],
        monkeypatch: pytest.MonkeyPatch,
    ) -> None:
        """Test that equal scores keep the lowest candidate indices."""
        design, state = tiny_design
        config = HalvingConfig(
            n_candidates=9, factor=3, min_resource=2, max_resource=18, cv_folds=2
        )
        monkeypatch.setattr(TuningService, "cv_score", staticmethod(lambda *args: 0.0))

        result = TuningService.halving_search(design, TINY_SPACE, config, state)

        assert [t.candidate_index for t in result.rung_trials(1)] == [0, 1, 2]
        assert result.best_index == 0

    def test_too_few_candidates(self, tiny_design: tuple[DesignMatrices, PipelineState]) -> None:
        """Test that fewer candidates than the halving factor are refused."""
        design, state = tiny_design
        config = HalvingConfig(n_candidates=2, factor=3, min_resource=2, max_resource=18)

        with pytest.raises(InvalidConfigException):
            TuningService.halving_search(design, TINY_SPACE, config, state)

    def test_search_is_deterministic(
        self, tiny_design: tuple[DesignMatrices, PipelineState]
    ) -> None:
        """Test that a fixed seed reproduces the whole search."""
        design, state = tiny_design
        config = HalvingConfig(
            n_candidates=3, factor=3, min_resource=2, max_resource=6, cv_folds=2, seed=6
        )

        first = TuningService.halving_search(design, TINY_SPACE, config, state)
        second = TuningService.halving_search(design, TINY_SPACE, config, state)

        assert first == second
