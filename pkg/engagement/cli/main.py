"""
Command-line entry point.

Usage:
    engagement synth    --output synth.csv --seed 42
    engagement prepare  --input songs.csv --output design.csv
    engagement train    --input songs.csv --model model.json --report report.json
    engagement tune     --input songs.csv --best-params best.json --trial-log trials.jsonl
                        [--refit --model model.json]
    engagement evaluate --model model.json --input test.csv [--report report.json]
    engagement predict  --model model.json --input new.csv --output predictions.csv

Every option can also come from ``--config FILE`` (``key = value`` lines); flags
given on the command line override the file. ``--set KEY=VALUE`` reaches section
options such as ``gbt.max_iter`` or ``column.views``.
"""

import argparse
import logging
from collections.abc import Sequence
from typing import Any

from engagement import __version__
from engagement.cli.commands import COMMANDS
from engagement.cli.config_file import assign, load_config_file, merge_layers
from engagement.cli.error_handlers import EXIT_USAGE, run_guarded
from engagement.config.logging_config import setup_logging
from engagement.exceptions import InvalidConfigException
from engagement.schemas.run import RunConfig

logger = logging.getLogger(__name__)

# argparse dest -> RunConfig field
FLAG_FIELDS: tuple[str, ...] = (
    "input",
    "model",
    "report",
    "output",
    "trial_log",
    "best_params",
    "seed",
    "split",
    "reference_date",
    "clip_quantile",
    "drop_log_clr",
    "refit",
    "log_level",
)


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value configuration file")
    common.add_argument("--input", help="input CSV file")
    common.add_argument("--model", help="model JSON file")
    common.add_argument("--report", help="metrics report JSON file")
    common.add_argument("--output", help="output CSV file")
    common.add_argument("--seed", type=int, help="random seed (default 42)")
    common.add_argument("--split", type=float, help="training fraction (default 0.8)")
    common.add_argument(
        "--drop-log-clr",
        action="store_true",
        default=None,
        help="exclude the comments-per-like feature",
    )
    common.add_argument("--reference-date", help="YYYY-MM-DD or latest-in-data")
    common.add_argument("--clip-quantile", type=float, help="ratio clipping quantile in (0, 1]")
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="any config-file option, e.g. gbt.max_iter=300 (repeatable)",
    )
    common.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="log verbosity (default from ENGAGEMENT_LOG_LEVEL)",
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per pipeline."""
    parser = argparse.ArgumentParser(
        prog="engagement",
        description="Predict comment and like counts from emotional and temporal features",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_options()

    subparsers.add_parser("prepare", parents=[common], help="write the engineered design table")
    subparsers.add_parser("train", parents=[common], help="fit, evaluate and save a model")
    tune = subparsers.add_parser("tune", parents=[common], help="successive-halving search")
    tune.add_argument("--best-params", help="best parameters JSON file")
    tune.add_argument("--trial-log", help="JSON-lines trial log")
    tune.add_argument(
        "--refit",
        action="store_true",
        default=None,
        help="refit the best candidate on the training split and save it to --model",
    )
    subparsers.add_parser("evaluate", parents=[common], help="score a saved model")
    subparsers.add_parser("predict", parents=[common], help="predict counts for new rows")
    subparsers.add_parser("synth", parents=[common], help="write a synthetic dataset")
    return parser


def build_config(args: argparse.Namespace) -> RunConfig:
    """
    Merge defaults, the config file and command-line flags into a RunConfig.

    Raises:
        InvalidConfigException: For unknown or malformed options
        ValidationError: For out-of-range values
    """
    file_layer = load_config_file(args.config) if args.config else {}

    flag_layer: dict[str, Any] = {}
    for item in args.overrides:
        if "=" not in item:
            raise InvalidConfigException("--set", f"expected KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        assign(flag_layer, key.strip(), value.strip(), "--set")
    for name in FLAG_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            flag_layer[name] = value

    config = RunConfig.model_validate(merge_layers(file_layer, flag_layer))
    config.validate_sections()
    return config


def main(argv: Sequence[str] | None = None) -> int:
    """
    Run one subcommand.

    Returns:
        int: Exit code (0 success, 1 pipeline or data error, 2 usage error)
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    config = run_guarded(lambda: build_config(args), validation_is_usage=True)
    if isinstance(config, int):
        return config

    setup_logging(config.log_level)
    logger.debug("Running command", extra={"command": args.command})
    command = COMMANDS[args.command]
    result = run_guarded(lambda: command(config))
    return int(result)
