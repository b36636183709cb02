"""
Synth Service - Synthetic Dataset Generator

Produces a seeded table in the ingestion schema with a known generative process:

    emotions_j     ~ Uniform[0, 1]                 (10 independent scores)
    log(views)     ~ Normal(10, 2), views = max(round(exp(.)), 10)
    upload_date    ~ Uniform over [start_date, end_date]
    like rate      = sigmoid(LIKE_INTERCEPT + emotions @ LIKE_COEFFICIENTS
                             + Normal(0, like_noise_sd))
    log(comment rate) = COMMENT_INTERCEPT + emotions @ COMMENT_COEFFICIENTS
                        + Normal(0, comment_noise_sd)
    likes          = max(round(like rate * views), 1)
    comments       = max(round(comment rate * views), 0)

Likes are nearly a deterministic function of the features; the comment rate is
dominated by noise. Draws are taken from one generator in a fixed order (emotions,
views, upload dates, like noise, comment noise), so a config fully determines the
table.
"""

import logging
from datetime import timedelta

import numpy as np

from engagement.schemas.records import EMOTION_NAMES, RawRecord, RawTable
from engagement.schemas.synth import SynthConfig

logger = logging.getLogger(__name__)

# Coefficients follow the order of EMOTION_NAMES.
LIKE_INTERCEPT = -3.0
LIKE_COEFFICIENTS: tuple[float, ...] = (0.8, 0.5, -0.3, 0.2, 0.6, -0.4, -0.2, -0.3, 0.3, 0.4)

COMMENT_INTERCEPT = -5.0
COMMENT_COEFFICIENTS: tuple[float, ...] = (
    0.15,
    0.10,
    0.05,
    0.0,
    -0.05,
    0.10,
    0.05,
    0.10,
    0.0,
    -0.05,
)

LOG_VIEWS_MEAN = 10.0
LOG_VIEWS_SD = 2.0
MIN_VIEWS = 10


class SynthService:
    """Service class for synthetic data generation."""

    @staticmethod
    def generate(config: SynthConfig | None = None) -> RawTable:
        """
        Generate a synthetic table.

        Args:
            config: Generator configuration

        Returns:
            RawTable: ``n_rows`` labeled records numbered 1..n, track ids ``synth-00000``...

        Example:
            table = SynthService.generate(SynthConfig(seed=42))
            TabularService.write_csv(table, "synth.csv")
        """
        config = config or SynthConfig()
        n = config.n_rows
        rng = np.random.default_rng(config.seed)

        emotions = rng.uniform(0.0, 1.0, size=(n, len(EMOTION_NAMES)))
        log_views = rng.normal(LOG_VIEWS_MEAN, LOG_VIEWS_SD, size=n)
        span_days = (config.end_date - config.start_date).days
        day_offsets = rng.integers(0, span_days + 1, size=n)
        like_noise = rng.normal(0.0, config.like_noise_sd, size=n)
        comment_noise = rng.normal(0.0, config.comment_noise_sd, size=n)

        views = np.maximum(np.rint(np.exp(log_views)), MIN_VIEWS)

        like_logit = LIKE_INTERCEPT + emotions @ np.array(LIKE_COEFFICIENTS) + like_noise
        like_rate = 1.0 / (1.0 + np.exp(-like_logit))
        likes = np.maximum(np.rint(like_rate * views), 1)

        comment_linear = COMMENT_INTERCEPT + emotions @ np.array(COMMENT_COEFFICIENTS)
        log_comment_rate = comment_linear + comment_noise
        comments = np.maximum(np.rint(np.exp(log_comment_rate) * views), 0)

        records = tuple(
            RawRecord(
                track_id=f"synth-{i:05d}",
                upload_date=config.start_date + timedelta(days=int(day_offsets[i])),
                views=int(views[i]),
                likes=int(likes[i]),
                comments=int(comments[i]),
                emotions=tuple(float(score) for score in emotions[i]),
            )
            for i in range(n)
        )
        logger.info(
            "Generated synthetic table",
            extra={"n_rows": n, "seed": config.seed, "comment_noise_sd": config.comment_noise_sd},
        )
        return RawTable(records=records, source_row_indices=tuple(range(1, n + 1)))
