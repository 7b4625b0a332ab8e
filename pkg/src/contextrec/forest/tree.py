"""Gini decision trees grown on dense numeric features."""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from contextrec.core.errors import ForestError
from contextrec.forest.params import ForestParams

# Impurities closer than this are treated as equal when breaking ties.
TIE_TOLERANCE = 1e-12

LEAF = -1


class Split(NamedTuple):
    feature: int
    threshold: float
    impurity: float


def gini(class_counts) -> float:
    """
    Gini impurity ``1 - sum(p_i^2)`` of a class-count vector.

    Raises:
        ForestError: If counts are negative or all zero
    """
    counts = np.asarray(class_counts, dtype=np.float64)
    if (counts < 0).any():
        raise ForestError("class counts must be nonnegative")
    total = counts.sum()
    if total <= 0:
        raise ForestError("gini of an empty node is undefined")
    p = counts / total
    return float(1.0 - np.dot(p, p))


def best_split(
    features: np.ndarray,
    labels: np.ndarray,
    n_classes: int,
    candidates,
) -> Split | None:
    """
    Search every (feature, midpoint) pair of ``candidates`` for the lowest
    weighted child Gini impurity.

    Samples go left when ``x <= threshold``. Ties prefer the lower feature
    index, then the lower threshold. Returns None only when no candidate has
    two distinct values.

    Args:
        features: ``(n, width)`` matrix of the node's samples
        labels: Encoded class indices, length ``n``
        n_classes: Size of the label vocabulary
        candidates: Feature indices to consider
    """
    candidates = np.sort(np.asarray(candidates, dtype=np.int64))
    n = labels.shape[0]
    if n < 2 or candidates.size == 0:
        return None

    columns = features[:, candidates]
    order = np.argsort(columns, axis=0, kind="stable")
    xs = np.take_along_axis(columns, order, axis=0)
    onehot = np.eye(n_classes)[labels]

    # left[i, j] = class counts of the first i+1 sorted samples of feature j
    left = np.cumsum(onehot[order], axis=0)[:-1]
    right = onehot.sum(axis=0) - left
    n_left = np.arange(1, n, dtype=np.float64)[:, None]
    n_right = n - n_left
    impurity = (n - (left**2).sum(axis=2) / n_left - (right**2).sum(axis=2) / n_right) / n
    impurity = np.where(xs[:-1] < xs[1:], impurity, np.inf)

    per_feature = impurity.min(axis=0)
    overall = per_feature.min()
    if not np.isfinite(overall):
        return None
    j = int(np.flatnonzero(per_feature <= overall + TIE_TOLERANCE)[0])
    i = int(np.flatnonzero(impurity[:, j] <= per_feature[j] + TIE_TOLERANCE)[0])

    lo, hi = xs[i, j], xs[i + 1, j]
    threshold = lo + (hi - lo) / 2.0
    if threshold >= hi:
        threshold = lo
    return Split(int(candidates[j]), float(threshold), float(impurity[i, j]))


@dataclass(frozen=True, eq=False)
class DecisionTree:
    """
    Flat node arrays of one tree.

    Node 0 is the root. Leaves have ``feature == -1``; ``counts`` holds the
    class counts of the training samples that reached each node.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray

    @property
    def node_count(self) -> int:
        return self.feature.shape[0]

    @property
    def leaf_count(self) -> int:
        return int((self.feature == LEAF).sum())

    @property
    def depth(self) -> int:
        depths = np.zeros(self.node_count, dtype=np.int64)
        for node in range(self.node_count):
            if self.feature[node] != LEAF:
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    def apply(self, features: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row of ``features``."""
        node = np.zeros(features.shape[0], dtype=np.int64)
        active = np.flatnonzero(self.feature[node] != LEAF)
        while active.size:
            current = node[active]
            go_left = features[active, self.feature[current]] <= self.threshold[current]
            node[active] = np.where(go_left, self.left[current], self.right[current])
            active = active[self.feature[node[active]] != LEAF]
        return node

    def leaf_distribution(self, features: np.ndarray) -> np.ndarray:
        """Normalized leaf class counts for every row."""
        counts = self.counts[self.apply(features)].astype(np.float64)
        return counts / counts.sum(axis=1, keepdims=True)

    def same_structure(self, other: "DecisionTree") -> bool:
        return all(
            np.array_equal(getattr(self, name), getattr(other, name))
            for name in ("feature", "threshold", "left", "right", "counts")
        )


def grow_tree(
    features: np.ndarray,
    labels: np.ndarray,
    n_classes: int,
    params: ForestParams,
    seed: int,
) -> DecisionTree:
    """
    Grow one tree depth-first.

    Each splittable node samples ``params.features_per_split`` candidate
    features from the tree's own generator. When none of them has two
    distinct values, the remaining features are searched before the node is
    made a leaf.

    Raises:
        ForestError: On an empty sample set
    """
    n, width = features.shape
    if n == 0:
        raise ForestError("cannot grow a tree on zero samples")
    rng = np.random.default_rng(seed)
    k = params.features_per_split(width)

    feature: list[int] = [LEAF]
    threshold: list[float] = [0.0]
    left: list[int] = [LEAF]
    right: list[int] = [LEAF]
    counts: list[np.ndarray] = [np.bincount(labels, minlength=n_classes)]

    stack = [(0, np.arange(n), 0)]
    while stack:
        node, index, depth = stack.pop()
        node_counts = counts[node]
        if (
            index.size < params.min_samples_split
            or np.count_nonzero(node_counts) <= 1
            or (params.max_depth is not None and depth >= params.max_depth)
        ):
            continue

        node_features = features[index]
        node_labels = labels[index]
        order = rng.permutation(width)
        split = best_split(node_features, node_labels, n_classes, order[:k])
        if split is None and k < width:
            split = best_split(node_features, node_labels, n_classes, order[k:])
        if split is None:
            continue

        goes_left = node_features[:, split.feature] <= split.threshold
        children = []
        for side in (index[goes_left], index[~goes_left]):
            child = len(feature)
            feature.append(LEAF)
            threshold.append(0.0)
            left.append(LEAF)
            right.append(LEAF)
            counts.append(np.bincount(labels[side], minlength=n_classes))
            children.append((child, side))

        feature[node] = split.feature
        threshold[node] = split.threshold
        left[node], right[node] = children[0][0], children[1][0]
        # right first so the left subtree is expanded first
        for child, side in reversed(children):
            stack.append((child, side, depth + 1))

    return DecisionTree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        counts=np.asarray(counts, dtype=np.int64).reshape(len(feature), n_classes),
    )
