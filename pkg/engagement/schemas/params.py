"""
Pydantic schema for gradient boosting hyperparameters.
"""

from pydantic import BaseModel, ConfigDict, Field


class GbtParams(BaseModel):
    """
    Hyperparameters of one gradient-boosted tree ensemble.

    Defaults follow the usual histogram gradient boosting defaults; the tuner
    overrides them. All bounds are enforced at construction.

    Example:
        GbtParams(learning_rate=0.05, max_leaf_nodes=63, seed=42)
    """

    model_config = ConfigDict(frozen=True)

    learning_rate: float = Field(default=0.1, ge=0.0)
    max_iter: int = Field(default=100, ge=1)
    max_leaf_nodes: int = Field(default=31, ge=2)
    min_samples_leaf: int = Field(default=20, ge=1)
    l2_regularization: float = Field(default=0.0, ge=0.0)
    max_bins: int = Field(default=255, ge=2, le=255)
    early_stopping: bool = True
    validation_fraction: float = Field(default=0.1, gt=0.0, lt=1.0)
    n_iter_no_change: int = Field(default=10, ge=1)
    tol: float = Field(default=1e-7, ge=0.0)
    seed: int = 0
