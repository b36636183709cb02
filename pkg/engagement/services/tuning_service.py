"""
Tuning Service - Hyperparameter Search Layer

Successive-halving random search over GbtParams. Every candidate is scored by
k-fold cross-validation as the negative mean absolute error of back-transformed
counts, averaged over the two targets. The resource is the number of boosting
iterations; early stopping is off inside cross-validation so the resource is the
only budget.
"""

import logging
import math
from pathlib import Path
from typing import Any

import numpy as np
from joblib import Parallel, delayed
from numpy.typing import NDArray

from engagement.config.settings import settings
from engagement.exceptions import (
    InvalidConfigException,
    TooFewRowsException,
)
from engagement.schemas.params import GbtParams
from engagement.schemas.pipeline import PipelineState
from engagement.schemas.tuning import (
    HalvingConfig,
    ParamSpace,
    RungSummary,
    SearchResult,
    TrialRecord,
)
from engagement.services.feature_service import DesignMatrices, FeatureService
from engagement.services.metrics_service import MetricsService
from engagement.services.model_service import ModelService
from engagement.utils.io import atomic_write_jsonl

logger = logging.getLogger(__name__)


def _log_uniform(rng: np.random.Generator, bounds: tuple[float, float]) -> float:
    low, high = bounds
    draw = math.exp(rng.uniform(math.log(low), math.log(high)))
    return low if low == high else draw


def _ranking_key(score: float, index: int) -> tuple[float, int]:
    """Sort key: higher score first, then lower candidate index."""
    return (math.inf if math.isnan(score) else -score, index)


class TuningService:
    """
    Service class for cross-validated successive-halving search.

    All randomness comes from explicit seeds, so a search is reproducible.
    """

    @staticmethod
    def sample_candidates(
        space: ParamSpace, n: int, seed: int, base: GbtParams | None = None
    ) -> list[GbtParams]:
        """
        Draw ``n`` independent candidates.

        Log-uniform dimensions use exp(uniform(log low, log high)); choice dimensions
        are uniform over their values. Fields outside the space come from ``base``.

        Args:
            space: Search space
            n: Number of candidates (>= 1)
            seed: Random seed
            base: Template for fields that are not searched

        Returns:
            list[GbtParams]: Candidates in draw order

        Example:
            candidates = TuningService.sample_candidates(ParamSpace(), 64, seed=42)
        """
        if n < 1:
            raise InvalidConfigException("n_candidates", "must be at least 1")
        base = base or GbtParams()
        rng = np.random.default_rng(seed)
        candidates = []
        for _ in range(n):
            learning_rate = _log_uniform(rng, space.learning_rate)
            max_leaf_nodes = space.max_leaf_nodes[int(rng.integers(len(space.max_leaf_nodes)))]
            min_samples_leaf = space.min_samples_leaf[
                int(rng.integers(len(space.min_samples_leaf)))
            ]
            l2_regularization = _log_uniform(rng, space.l2_regularization)
            candidates.append(
                base.model_copy(
                    update={
                        "learning_rate": learning_rate,
                        "max_leaf_nodes": int(max_leaf_nodes),
                        "min_samples_leaf": int(min_samples_leaf),
                        "l2_regularization": l2_regularization,
                        "max_bins": space.max_bins,
                    }
                )
            )
        return candidates

    @staticmethod
    def kfold_split(n_rows: int, k: int, seed: int) -> list[NDArray[np.intp]]:
        """
        Seeded shuffle into ``k`` disjoint folds of size floor(n/k) or ceil(n/k).

        The first ``n mod k`` folds get the extra row. Each fold is sorted.

        Raises:
            TooFewRowsException: If k > n_rows
            InvalidConfigException: If k < 2

        Example:
            TuningService.kfold_split(7, 3, seed=0)  # fold sizes 3, 2, 2
        """
        if k < 2:
            raise InvalidConfigException("cv_folds", "must be at least 2")
        if k > n_rows:
            raise TooFewRowsException(n_rows, k)
        permutation = np.random.default_rng(seed).permutation(n_rows)
        return [np.sort(fold).astype(np.intp) for fold in np.array_split(permutation, k)]

    @staticmethod
    def cv_score(
        candidate: GbtParams,
        design: DesignMatrices,
        folds: list[NDArray[np.intp]],
        resource: int,
        pipeline: PipelineState,
    ) -> float:
        """
        Cross-validated negative MAE on back-transformed counts.

        For each fold, both targets are fitted on the other folds with
        ``max_iter = resource`` and early stopping off, the held-out fold is
        predicted and back-transformed with its own views, and the two per-target
        count MAEs are averaged. The score is minus the mean over folds.

        Args:
            candidate: Hyperparameters to score
            design: Labeled design matrices of the training split
            folds: Disjoint row-index folds covering the design rows
            resource: Boosting iterations per fit
            pipeline: Pipeline state that produced the design

        Returns:
            float: Score (<= 0; higher is better)
        """
        Y, true_counts = design.labels()
        params = candidate.model_copy(update={"max_iter": resource, "early_stopping": False})
        all_rows = np.arange(design.n_rows, dtype=np.intp)
        fold_errors = []
        for held_out in folds:
            train_rows = np.setdiff1d(all_rows, held_out, assume_unique=True)
            model = ModelService.fit_multi(
                design.X[train_rows], Y[train_rows], params, pipeline, design.feature_order
            )
            predictions = ModelService.predict_multi(model, design.X[held_out])
            counts, _ = FeatureService.back_transform_batch(predictions, design.views[held_out])
            truth = true_counts[held_out]
            mae_comments = MetricsService.mae(counts[:, 0], truth[:, 0])
            mae_likes = MetricsService.mae(counts[:, 1], truth[:, 1])
            fold_errors.append(0.5 * (mae_comments + mae_likes))
        return -float(np.mean(fold_errors))

    @staticmethod
    def _safe_score(
        index: int,
        candidate: GbtParams,
        design: DesignMatrices,
        folds: list[NDArray[np.intp]],
        resource: int,
        pipeline: PipelineState,
    ) -> float:
        try:
            score = TuningService.cv_score(candidate, design, folds, resource, pipeline)
        except Exception:
            logger.warning(
                "Candidate failed; scoring it -inf",
                extra={"candidate_index": index, "resource": resource},
                exc_info=True,
            )
            return -math.inf
        if math.isnan(score):
            logger.warning(
                "Candidate produced a NaN score; scoring it -inf",
                extra={"candidate_index": index, "resource": resource},
            )
            return -math.inf
        return score

    @staticmethod
    def schedule(config: HalvingConfig) -> list[RungSummary]:
        """
        Planned rungs: sizes n_{r+1} = floor(n_r / factor) and resources
        min(resource_r * factor, max_resource), for at most ``config.n_rungs`` rungs
        and while at least one candidate remains.

        Example:
            HalvingConfig(n_candidates=9, factor=3, min_resource=10, max_resource=90)
            # sizes 9, 3, 1 at resources 10, 30, 90
        """
        rungs = []
        n_candidates, resource = config.n_candidates, config.min_resource
        for rung in range(config.n_rungs):
            if n_candidates < 1:
                break
            rungs.append(RungSummary(rung=rung, n_candidates=n_candidates, resource=resource))
            n_candidates //= config.factor
            resource = min(resource * config.factor, config.max_resource)
        return rungs

    @staticmethod
    def halving_search(
        design: DesignMatrices,
        space: ParamSpace,
        config: HalvingConfig,
        pipeline: PipelineState,
        base: GbtParams | None = None,
    ) -> SearchResult:
        """
        Successive-halving random search.

        Rung 0 scores every sampled candidate at ``min_resource``. Each later rung
        keeps the best floor(n / factor) candidates of the previous rung (higher
        score first, lower candidate index on ties) and multiplies the resource by
        ``factor``, capped at ``max_resource``. A candidate whose fit fails scores
        -inf and stays in the log.

        Args:
            design: Labeled design matrices of the training split
            space: Search space
            config: Halving schedule
            pipeline: Pipeline state that produced the design
            base: Template for the non-searched parameters

        Returns:
            SearchResult: Best parameters (with max_iter set to the final resource and
                early stopping on, ready for a refit), full trial log and schedule

        Raises:
            InvalidConfigException: If n_candidates < factor
            TooFewRowsException: If there are fewer rows than folds

        Example:
            result = TuningService.halving_search(design, ParamSpace(), HalvingConfig(), state)
            print(result.best_params, result.best_score)
        """
        if config.n_candidates < config.factor:
            raise InvalidConfigException("n_candidates", "must be at least the halving factor")
        base = base or GbtParams(seed=config.seed)
        candidates = TuningService.sample_candidates(space, config.n_candidates, config.seed, base)
        folds = TuningService.kfold_split(design.n_rows, config.cv_folds, config.seed)
        plan = TuningService.schedule(config)

        trials: list[TrialRecord] = []
        survivors = list(range(config.n_candidates))
        final_scores: dict[int, float] = {}

        for summary in plan:
            scores = Parallel(n_jobs=settings.N_JOBS, prefer="threads")(
                delayed(TuningService._safe_score)(
                    index, candidates[index], design, folds, summary.resource, pipeline
                )
                for index in survivors
            )
            rung_scores = dict(zip(survivors, scores))
            trials.extend(
                TrialRecord(
                    rung=summary.rung,
                    candidate_index=index,
                    resource=summary.resource,
                    score=rung_scores[index],
                    params=candidates[index],
                )
                for index in survivors
            )
            final_scores = rung_scores
            logger.info(
                "Completed rung",
                extra={
                    "rung": summary.rung,
                    "n_candidates": len(survivors),
                    "resource": summary.resource,
                    "best_score": max(scores),
                },
            )
            ranked = sorted(survivors, key=lambda i: _ranking_key(rung_scores[i], i))
            survivors = sorted(ranked[: len(survivors) // config.factor])

        best_index = min(final_scores, key=lambda i: _ranking_key(final_scores[i], i))
        final_resource = plan[-1].resource
        best_params = candidates[best_index].model_copy(
            update={"max_iter": final_resource, "early_stopping": True}
        )
        return SearchResult(
            best_params=best_params,
            best_index=best_index,
            best_score=final_scores[best_index],
            trial_log=tuple(trials),
            schedule=tuple(plan),
        )

    @staticmethod
    def trial_rows(result: SearchResult) -> list[dict[str, Any]]:
        """JSON-ready trial log; non-finite scores become null with ``failed`` set."""
        rows = []
        for trial in result.trial_log:
            finite = math.isfinite(trial.score)
            rows.append(
                {
                    "rung": trial.rung,
                    "candidate_index": trial.candidate_index,
                    "resource": trial.resource,
                    "score": trial.score if finite else None,
                    "failed": not finite,
                    "params": trial.params.model_dump(mode="json"),
                }
            )
        return rows

    @staticmethod
    def write_trial_log(result: SearchResult, path: Path | str) -> None:
        """Write one JSON object per (rung, candidate) evaluation."""
        atomic_write_jsonl(Path(path), TuningService.trial_rows(result))
        logger.info("Wrote trial log", extra={"path": str(path), "n_trials": len(result.trial_log)})
