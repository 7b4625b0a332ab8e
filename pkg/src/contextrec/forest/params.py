"""Random forest hyperparameters."""

import math

import numpy as np
from pydantic import BaseModel, Field


class ForestParams(BaseModel):
    """
    Hyperparameters of a bagged Gini forest.

    ``max_depth=None`` grows trees until leaves are pure; ``max_features=None``
    considers ``ceil(sqrt(width))`` features per split.
    """

    trees: int = Field(default=100, ge=1)
    max_depth: int | None = Field(default=None, ge=1)
    max_features: int | None = Field(default=None, ge=1)
    bootstrap: bool = True
    sample_fraction: float = Field(default=1.0, gt=0.0, le=1.0)
    min_samples_split: int = Field(default=2, ge=2)
    seed: int = Field(default=7, ge=0)

    def features_per_split(self, width: int) -> int:
        if self.max_features is None:
            return max(1, math.ceil(math.sqrt(width)))
        return min(self.max_features, width)


def derive_seed(seed: int, *key: int) -> int:
    """Child seed of ``seed`` for the stream identified by ``key``."""
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))
    return int(sequence.generate_state(1, np.uint64)[0])
