"""
Subcommand implementations.

Each ``cmd_*`` function takes a validated RunConfig, runs one pipeline end to end and
returns a process exit code. Reports and tables go to stdout; logs go to stderr.
File outputs contain no timestamps, so a fixed seed and input reproduce them byte
for byte.
"""

import logging
import math
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from engagement import __version__
from engagement.cli.error_handlers import EXIT_OK
from engagement.exceptions import MissingColumnException
from engagement.schemas.pipeline import PipelineState
from engagement.schemas.records import RawTable
from engagement.schemas.report import MetricsReport
from engagement.schemas.run import RunConfig
from engagement.services.feature_service import DesignMatrices, FeatureService
from engagement.services.metrics_service import MetricsService
from engagement.services.model_service import EngagementModel, ModelService
from engagement.services.synth_service import SynthService
from engagement.services.tabular_service import TabularService
from engagement.services.tuning_service import TuningService
from engagement.utils.io import atomic_write_json, atomic_write_text, dumps_json

logger = logging.getLogger(__name__)

PREDICTION_COLUMNS: tuple[str, ...] = (
    "track_id",
    "predicted_comments",
    "predicted_likes",
    "order_comments",
    "order_likes",
)


def _load_clean(config: RunConfig, engagement: bool = True) -> tuple[RawTable, RawTable]:
    """Loaded and cleaned tables for ``--input``."""
    loaded = TabularService.load_csv(
        config.require("input"),
        config.column_schema(),
        require_engagement=engagement,
        read_engagement=engagement,
    )
    return loaded, TabularService.clean(loaded)


def _split_designs(
    config: RunConfig, cleaned: RawTable
) -> tuple[DesignMatrices, DesignMatrices, PipelineState]:
    """Seeded split, then fit the pipeline on the training side only."""
    pipeline_config = FeatureService.anchor_reference_date(config.pipeline_config(), cleaned)
    train_table, test_table = TabularService.train_test_split(cleaned, config.split, config.seed)
    train, state = FeatureService.build_design(train_table, pipeline_config)
    test, _ = FeatureService.build_design(test_table, state=state)
    return train, test, state


def _run_metadata(
    command: str,
    config: RunConfig,
    model: EngagementModel,
    loaded: RawTable,
    cleaned: RawTable,
    n_train: int,
    n_test: int,
) -> dict[str, Any]:
    state = model.pipeline
    return {
        "command": command,
        "version": __version__,
        "seed": config.seed,
        "split_fraction": config.split,
        "split_policy": "seeded random split before fitting clip thresholds and bins",
        "n_rows_loaded": len(loaded),
        "n_rows_dropped_missing": loaded.n_dropped,
        "n_rows_removed_clean": len(loaded) - len(cleaned),
        "n_train": n_train,
        "n_test": n_test,
        "clip_quantile": state.config.clip_quantile,
        "clip_thresholds": dict(state.clip_thresholds),
        "reference_date": state.resolved_reference_date.isoformat(),
        "drop_log_clr": state.config.drop_log_clr,
        "params": model.params_used["log_cr"].model_dump(mode="json"),
        "n_trees": {"log_cr": model.model_cr.n_iter, "log_lr": model.model_lr.n_iter},
    }


def _emit_report(config: RunConfig, report: MetricsReport) -> None:
    print(MetricsService.render_table(report), end="")
    if config.report is not None:
        atomic_write_json(config.report, report.model_dump(mode="json"))
        logger.info("Wrote report", extra={"path": str(config.report)})


def cmd_prepare(config: RunConfig) -> int:
    """
    Load, clean and featurize the whole input file (pipeline fitted on it), then write
    the engineered table: track id, features, targets, views and raw counts.
    """
    output = config.require("output")
    _, cleaned = _load_clean(config)
    design, state = FeatureService.build_design(cleaned, config.pipeline_config())
    Y, true_counts = design.labels()

    frame = pd.DataFrame(design.X, columns=list(design.feature_order))
    frame.insert(0, "track_id", [track or "" for track in design.track_ids])
    frame["log_cr"] = Y[:, 0]
    frame["log_lr"] = Y[:, 1]
    frame["views"] = design.views.astype(np.int64)
    frame["comments"] = true_counts[:, 0].astype(np.int64)
    frame["likes"] = true_counts[:, 1].astype(np.int64)
    atomic_write_text(output, frame.to_csv(index=False, lineterminator="\n"))
    logger.info(
        "Wrote design table",
        extra={
            "path": str(output),
            "n_rows": design.n_rows,
            "reference_date": state.resolved_reference_date.isoformat(),
        },
    )
    return EXIT_OK


def cmd_train(config: RunConfig) -> int:
    """
    load -> clean -> seeded split -> fit pipeline on train, transform test -> fit both
    targets -> evaluate on test -> write model and report, print the metric table.
    """
    model_path = config.require("model")
    loaded, cleaned = _load_clean(config)
    train, test, state = _split_designs(config, cleaned)

    Y_train, _ = train.labels()
    model = ModelService.fit_multi(train.X, Y_train, config.gbt_params(), state)
    report = MetricsService.evaluate(model, test).with_metadata(
        **_run_metadata("train", config, model, loaded, cleaned, train.n_rows, test.n_rows)
    )

    ModelService.save(model, model_path)
    _emit_report(config, report)
    return EXIT_OK


def cmd_tune(config: RunConfig) -> int:
    """
    Successive-halving search on the training split; writes the best parameters and
    the trial log. With ``--refit`` the best parameters are refit on the whole training
    split, saved, and evaluated on the held-out split.
    """
    best_params_path = config.require("best_params")
    trial_log_path = config.require("trial_log")
    model_path = config.require("model") if config.refit else None

    loaded, cleaned = _load_clean(config)
    train, test, state = _split_designs(config, cleaned)
    result = TuningService.halving_search(
        train, config.param_space(), config.halving_config(), state, base=config.gbt_params()
    )

    TuningService.write_trial_log(result, trial_log_path)
    finite = math.isfinite(result.best_score)
    atomic_write_json(
        best_params_path,
        {
            "best_index": result.best_index,
            "best_score": result.best_score if finite else None,
            "params": result.best_params.model_dump(mode="json"),
            "schedule": [rung.model_dump(mode="json") for rung in result.schedule],
        },
    )
    print(
        dumps_json(
            {
                "best_index": result.best_index,
                "best_score": result.best_score if finite else None,
                "n_trials": len(result.trial_log),
            }
        ),
        end="",
    )

    if model_path is not None:
        Y_train, _ = train.labels()
        model = ModelService.fit_multi(train.X, Y_train, result.best_params, state)
        ModelService.save(model, model_path)
        report = MetricsService.evaluate(model, test).with_metadata(
            **_run_metadata("tune", config, model, loaded, cleaned, train.n_rows, test.n_rows)
        )
        _emit_report(config, report)
    return EXIT_OK


def cmd_evaluate(config: RunConfig) -> int:
    """Score a saved model on a labeled file in transform mode."""
    model = ModelService.load(config.require("model"))
    loaded, cleaned = _load_clean(config)
    design, _ = FeatureService.build_design(cleaned, state=model.pipeline)
    report = MetricsService.evaluate(model, design).with_metadata(
        command="evaluate",
        version=__version__,
        n_rows_loaded=len(loaded),
        n_rows_dropped_missing=loaded.n_dropped,
        n_rows_removed_clean=len(loaded) - len(cleaned),
        reference_date=model.pipeline.resolved_reference_date.isoformat(),
    )
    _emit_report(config, report)
    return EXIT_OK


def cmd_predict(config: RunConfig) -> int:
    """
    Predict counts for every usable row of ``--input``.

    Likes and Comments are read only when the model uses log_clr; otherwise rows are
    filtered on views alone.
    Rows without a track id are identified by their 1-based data row number.
    """
    model = ModelService.load(config.require("model"))
    output = config.require("output")
    _, cleaned = _load_clean(config, engagement=model.uses_log_clr)
    if model.uses_log_clr and not cleaned.is_labeled:
        raise MissingColumnException("Likes/Comments (required by log_clr)")
    design, _ = FeatureService.build_design(cleaned, state=model.pipeline)

    predictions = ModelService.predict_multi(model, design.X)
    counts, n_floored = FeatureService.back_transform_batch(predictions, design.views)
    track_ids = [
        track if track is not None else str(row)
        for track, row in zip(design.track_ids, cleaned.source_row_indices)
    ]
    frame = pd.DataFrame(
        {
            "track_id": track_ids,
            "predicted_comments": counts[:, 0],
            "predicted_likes": counts[:, 1],
            "order_comments": MetricsService.orders_of(counts[:, 0]),
            "order_likes": MetricsService.orders_of(counts[:, 1]),
        },
        columns=list(PREDICTION_COLUMNS),
    )
    atomic_write_text(output, frame.to_csv(index=False, lineterminator="\n"))
    logger.info(
        "Wrote predictions",
        extra={"path": str(output), "n_rows": design.n_rows, "n_floored": sum(n_floored)},
    )
    return EXIT_OK


def cmd_synth(config: RunConfig) -> int:
    """Write a synthetic CSV in the ingestion schema."""
    output: Path = config.require("output")
    table = SynthService.generate(config.synth_config())
    TabularService.write_csv(table, output, config.column_schema())
    logger.info("Wrote synthetic table", extra={"path": str(output), "n_rows": len(table)})
    return EXIT_OK


COMMANDS = {
    "prepare": cmd_prepare,
    "train": cmd_train,
    "tune": cmd_tune,
    "evaluate": cmd_evaluate,
    "predict": cmd_predict,
    "synth": cmd_synth,
}
