"""
Engagement Predictor - Main Package

Predicts comment and like counts for music tracks from emotional, temporal and
exposure features using a histogram gradient-boosted multi-target regressor.

Subpackages:
    config: Process settings and logging configuration
    schemas: Pydantic models for records, configs, parameters and reports
    services: Pipeline stages (ingestion, features, models, metrics, tuning, synthetic data)
    gbt: Histogram gradient boosting engine
    cli: Batch command-line front end
"""

__version__ = "0.1.0"
