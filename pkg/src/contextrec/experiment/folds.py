"""Seeded k-fold partitions."""

import numpy as np

from contextrec.core.errors import ExperimentError


def _check(n: int, k: int) -> None:
    if k < 2:
        raise ExperimentError(f"need at least 2 folds, got {k}")
    if n < k:
        raise ExperimentError(f"cannot split {n} records into {k} folds")


def kfold(n: int, k: int = 5, seed: int = 0) -> list[np.ndarray]:
    """
    Partition ``range(n)`` into ``k`` random folds.

    Fold sizes differ by at most one, larger folds first. Each fold's
    indices are sorted.
    """
    _check(n, k)
    permutation = np.random.default_rng(seed).permutation(n)
    return [np.sort(fold) for fold in np.array_split(permutation, k)]


def stratified_kfold(labels: np.ndarray, k: int = 5, seed: int = 0) -> list[np.ndarray]:
    """
    Folds with each label spread as evenly as possible.

    Records of each label, in sorted label order and shuffled within the
    label, are dealt round-robin, so fold sizes still differ by at most one.
    """
    labels = np.asarray(labels)
    n = labels.shape[0]
    _check(n, k)
    rng = np.random.default_rng(seed)
    dealt = np.concatenate([rng.permutation(np.flatnonzero(labels == label)) for label in np.unique(labels)])
    assignment = np.empty(n, dtype=np.int64)
    assignment[dealt] = np.arange(n) % k
    return [np.flatnonzero(assignment == fold) for fold in range(k)]
