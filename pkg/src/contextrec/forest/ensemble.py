"""Bagged forests of Gini trees and the depth-tuning protocol."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from sklearn.metrics import f1_score

from contextrec.core.errors import ForestError
from contextrec.forest.params import ForestParams, derive_seed
from contextrec.forest.tree import DecisionTree, grow_tree

logger = logging.getLogger(__name__)

# Fraction of records used for training when tuning the depth.
TUNING_TRAIN_FRACTION = 0.75


@dataclass(frozen=True, eq=False)
class RandomForest:
    """Trees sharing one feature width and label vocabulary."""

    trees: list[DecisionTree]
    vocabulary: tuple[str, ...]
    params: ForestParams
    seeds: tuple[int, ...]
    width: int

    def _check_width(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[1] != self.width:
            raise ForestError(f"expected feature width {self.width}, got shape {features.shape}")
        return features

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        """Vote fractions per class: the mean of the trees' normalized leaf counts."""
        features = self._check_width(features)
        votes = np.zeros((features.shape[0], len(self.vocabulary)))
        for tree in self.trees:
            votes += tree.leaf_distribution(features)
        return votes / len(self.trees)

    def predict_batch(self, features: np.ndarray) -> np.ndarray:
        """Predicted labels; ties go to the lowest vocabulary index."""
        index = np.argmax(self.predict_proba(features), axis=1)
        return np.asarray(self.vocabulary, dtype=object)[index]

    def predict(self, vector: np.ndarray) -> tuple[str, dict[str, float]]:
        """Label and per-class vote fractions of one feature vector."""
        vector = np.asarray(vector, dtype=np.float64)
        if vector.ndim != 1:
            raise ForestError(f"expected a single feature vector, got shape {vector.shape}")
        fractions = self.predict_proba(vector[None, :])[0]
        label = self.vocabulary[int(np.argmax(fractions))]
        return label, dict(zip(self.vocabulary, fractions.tolist()))

    def same_structure(self, other: "RandomForest") -> bool:
        return (
            self.vocabulary == other.vocabulary
            and self.params == other.params
            and self.seeds == other.seeds
            and self.width == other.width
            and len(self.trees) == len(other.trees)
            and all(a.same_structure(b) for a, b in zip(self.trees, other.trees))
        )


def _resample(n: int, params: ForestParams, seed: int) -> np.ndarray:
    rng = np.random.default_rng([seed, 1])
    size = max(1, int(round(params.sample_fraction * n)))
    if params.bootstrap:
        return rng.integers(n, size=size)
    if size < n:
        return np.sort(rng.choice(n, size=size, replace=False))
    return np.arange(n)


def train_forest(
    features: np.ndarray,
    labels: np.ndarray,
    vocabulary: tuple[str, ...],
    params: ForestParams,
    workers: int = 1,
) -> RandomForest:
    """
    Train ``params.trees`` trees on resamples of the data.

    Tree ``t`` draws its resample and its split candidates from
    ``derive_seed(params.seed, t)``, so the forest does not depend on
    ``workers``.

    Args:
        features: ``(n, width)`` finite feature matrix
        labels: Class indices into ``vocabulary``
        vocabulary: Label names, in index order
        params: Forest hyperparameters
        workers: Threads used to grow trees

    Raises:
        ForestError: On empty or inconsistent input
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if features.ndim != 2 or features.shape[0] == 0:
        raise ForestError("cannot train a forest on an empty dataset")
    if labels.shape != (features.shape[0],):
        raise ForestError(f"{labels.shape[0]} labels for {features.shape[0]} records")
    if not np.isfinite(features).all():
        raise ForestError("features contain NaN or infinite values; impute first")
    if labels.min() < 0 or labels.max() >= len(vocabulary):
        raise ForestError("label index outside the vocabulary")

    seeds = tuple(derive_seed(params.seed, t) for t in range(params.trees))

    def grow(seed: int) -> DecisionTree:
        sample = _resample(features.shape[0], params, seed)
        return grow_tree(features[sample], labels[sample], len(vocabulary), params, seed)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        trees = list(pool.map(grow, seeds))

    logger.debug("Trained %d trees (max_depth=%s) on %d records", len(trees), params.max_depth, features.shape[0])
    return RandomForest(
        trees=trees,
        vocabulary=tuple(vocabulary),
        params=params,
        seeds=seeds,
        width=features.shape[1],
    )


def _depth_key(depth: int | None) -> float:
    return float("inf") if depth is None else float(depth)


def tune_depth(
    features: np.ndarray,
    labels: np.ndarray,
    vocabulary: tuple[str, ...],
    depth_grid: list[int | None],
    params: ForestParams,
    seed: int,
    workers: int = 1,
) -> int | None:
    """
    Pick the maximum depth with the best validation micro-F1.

    Records are split 75/25 at random; one forest per grid depth is trained
    on the larger part and scored on the rest. Ties go to the smallest depth
    (``None``, unlimited, counts as the largest).

    Raises:
        ForestError: On an empty grid or fewer than 4 records
    """
    if not depth_grid:
        raise ForestError("depth grid is empty")
    n = len(labels)
    if n < 4:
        raise ForestError(f"need at least 4 records to tune the depth, got {n}")

    order = np.random.default_rng(seed).permutation(n)
    cut = min(n - 1, max(1, int(round(TUNING_TRAIN_FRACTION * n))))
    train, valid = np.sort(order[:cut]), np.sort(order[cut:])

    best_depth, best_score = None, -1.0
    for depth in sorted(set(depth_grid), key=_depth_key):
        forest = train_forest(
            features[train], labels[train], vocabulary, params.model_copy(update={"max_depth": depth}), workers
        )
        predicted = np.argmax(forest.predict_proba(features[valid]), axis=1)
        score = float(f1_score(labels[valid], predicted, average="micro"))
        logger.debug("Depth %s: validation micro-F1 %.4f", depth, score)
        if score > best_score:
            best_depth, best_score = depth, score

    logger.info("Chose max depth %s (validation micro-F1 %.4f)", best_depth, best_score)
    return best_depth
