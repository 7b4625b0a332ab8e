"""Median imputation fit on a training split."""

import logging
from dataclasses import replace

import numpy as np
from pydantic import BaseModel

from contextrec.core.errors import ImputationError
from contextrec.ingestion.dataset import Dataset

# Suffix of the 0/1 columns appended by ``append_mask_features``.
INDICATOR_SUFFIX = "_was_missing"

logger = logging.getLogger(__name__)


class ImputePolicy(BaseModel):
    """How masked entries are handled."""

    append_mask_features: bool = False


class MedianImputer:
    """Replaces masked entries with per-column medians of the fitting split."""

    def __init__(self, policy: ImputePolicy | None = None):
        self.policy = policy or ImputePolicy()
        self.medians: np.ndarray | None = None

    def fit(self, features: np.ndarray, mask: np.ndarray, names: list[str] | None = None) -> "MedianImputer":
        """
        Compute column medians over unmasked entries.

        Raises:
            ImputationError: If a column has no unmasked entry
        """
        observed = (~mask).sum(axis=0)
        empty = np.flatnonzero(observed == 0)
        if empty.size:
            column = names[empty[0]] if names is not None else f"#{empty[0]}"
            raise ImputationError(f"column {column} has no observed values to fit a median")
        self.medians = np.nanmedian(np.where(mask, np.nan, features), axis=0)
        return self

    def transform(self, features: np.ndarray, mask: np.ndarray) -> np.ndarray:
        """Fill masked entries; append the mask as 0/1 columns when the policy asks."""
        if self.medians is None:
            raise ImputationError("imputer used before fit")
        filled = np.where(mask, self.medians, features)
        if self.policy.append_mask_features:
            filled = np.hstack([filled, mask.astype(np.float64)])
        return filled


def impute(dataset: Dataset, policy: ImputePolicy | None = None, fit_on: Dataset | None = None) -> Dataset:
    """
    Return ``dataset`` with masked entries replaced by medians of ``fit_on``.

    ``fit_on`` defaults to ``dataset`` itself; pass the training split to
    impute a test split without leakage. Unmasked values are never changed.
    """
    policy = policy or ImputePolicy()
    source = fit_on if fit_on is not None else dataset
    if not dataset.mask.any() and not policy.append_mask_features:
        return dataset

    imputer = MedianImputer(policy).fit(source.features, source.mask, source.feature_names)
    features = imputer.transform(dataset.features, dataset.mask)
    names = list(dataset.feature_names)
    if policy.append_mask_features:
        names += [name + INDICATOR_SUFFIX for name in dataset.feature_names]
    logger.debug("Imputed %d masked entries", int(dataset.mask.sum()))
    return replace(
        dataset,
        features=features,
        mask=np.zeros(features.shape, dtype=bool),
        feature_names=names,
        vocabularies=dict(dataset.vocabularies),
    )
