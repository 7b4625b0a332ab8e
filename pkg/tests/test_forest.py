"""Tests for the from-scratch Gini trees and forests."""

import numpy as np
import pytest

from contextrec.core.errors import ForestError, ModelFormatError
from contextrec.forest import (
    ForestParams,
    best_split,
    derive_seed,
    gini,
    grow_tree,
    load_forest,
    save_forest,
    train_forest,
    tune_depth,
)
from contextrec.forest.tree import LEAF, TIE_TOLERANCE
from contextrec.ontology import Aspect


def exhaustive_split(features, labels, n_classes, candidates):
    """Reference split search: every feature, every midpoint, weighted child Gini."""
    n = len(labels)
    best = {}
    for j in sorted(candidates):
        values = np.unique(features[:, j])
        scores = []
        for lo, hi in zip(values[:-1], values[1:]):
            threshold = lo + (hi - lo) / 2.0
            if threshold >= hi:
                threshold = lo
            goes_left = features[:, j] <= threshold
            left = np.bincount(labels[goes_left], minlength=n_classes)
            right = np.bincount(labels[~goes_left], minlength=n_classes)
            impurity = goes_left.sum() / n * gini(left) + (~goes_left).sum() / n * gini(right)
            scores.append((impurity, threshold))
        if scores:
            best[j] = scores
    if not best:
        return None
    overall = min(min(s for s, _ in scores) for scores in best.values())
    for j, scores in best.items():
        feature_min = min(s for s, _ in scores)
        if feature_min <= overall + TIE_TOLERANCE:
            for impurity, threshold in scores:
                if impurity <= feature_min + TIE_TOLERANCE:
                    return j, threshold, impurity
    return None


def dataset_arrays(dataset):
    return dataset.features, dataset.encoded(Aspect.WE), dataset.vocabularies[Aspect.WE]


class TestGini:
    """Tests for the impurity measure."""

    @pytest.mark.parametrize(
        ("counts", "expected"),
        [([10], 0.0), ([5, 5], 0.5), ([1, 1, 1, 1], 0.75), ([3, 1], 0.375), ([0, 4, 0], 0.0)],
    )
    def test_values(self, counts, expected):
        """Test impurity of known count vectors."""
        assert gini(counts) == pytest.approx(expected)

    @pytest.mark.parametrize("counts", [[0, 0], [], [-1, 3]])
    def test_invalid_counts(self, counts):
        """Test empty and negative counts are rejected."""
        with pytest.raises(ForestError):
            gini(counts)


class TestBestSplit:
    """Tests for the split search."""

    def test_separable(self):
        """Test a clean separation finds the midpoint with zero impurity."""
        features = np.array([[1.0], [2.0], [3.0], [4.0]])
        split = best_split(features, np.array([0, 0, 1, 1]), 2, [0])
        assert split.feature == 0
        assert split.threshold == 2.5
        assert split.impurity == 0.0

    def test_threshold_tie_prefers_lower(self):
        """Test equally good thresholds resolve to the lowest."""
        features = np.array([[1.0], [2.0], [3.0], [4.0]])
        split = best_split(features, np.array([0, 1, 0, 1]), 2, [0])
        assert split.threshold == 1.5
        assert split.impurity == pytest.approx(1 / 3)

    def test_feature_tie_prefers_lower(self):
        """Test identical columns resolve to the lower feature index."""
        column = np.array([3.0, 1.0, 4.0, 1.0, 5.0])
        features = np.column_stack([column, column])
        split = best_split(features, np.array([1, 0, 1, 0, 1]), 2, [1, 0])
        assert split.feature == 0

    def test_zero_gain_split_allowed(self):
        """Test a split that does not lower impurity is still returned."""
        features = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        split = best_split(features, np.array([0, 1, 1, 0]), 2, [0, 1])
        assert split.impurity == pytest.approx(0.5)

    def test_constant_features(self):
        """Test no split exists when every candidate is constant."""
        features = np.ones((5, 3))
        assert best_split(features, np.array([0, 1, 0, 1, 0]), 2, [0, 1, 2]) is None

    def test_matches_exhaustive_search(self):
        """Test the vectorized search agrees with a brute-force search on random nodes."""
        rng = np.random.default_rng(42)
        for _ in range(200):
            n = int(rng.integers(2, 65))
            width = int(rng.integers(1, 5))
            n_classes = int(rng.integers(2, 4))
            features = rng.integers(0, 6, size=(n, width)).astype(np.float64)
            labels = rng.integers(n_classes, size=n)
            candidates = list(range(width))
            expected = exhaustive_split(features, labels, n_classes, candidates)
            split = best_split(features, labels, n_classes, candidates)
            if expected is None:
                assert split is None
                continue
            assert (split.feature, split.threshold) == expected[:2]
            assert split.impurity == pytest.approx(expected[2], abs=1e-12)

    def test_every_tree_node_matches_exhaustive_search(self):
        """Test each node of an unbagged one-tree forest holds the brute-force split of its samples."""
        rng = np.random.default_rng(7)
        for case in range(200):
            n = int(rng.integers(2, 65))
            width = int(rng.integers(1, 5))
            n_classes = int(rng.integers(2, 4))
            features = rng.integers(0, 6, size=(n, width)).astype(np.float64)
            labels = rng.integers(n_classes, size=n)
            vocabulary = tuple(f"c{i}" for i in range(n_classes))
            params = ForestParams(trees=1, bootstrap=False, max_features=width, seed=case)
            tree = train_forest(features, labels, vocabulary, params).trees[0]

            stack = [(0, np.arange(n))]
            while stack:
                node, rows = stack.pop()
                expected = exhaustive_split(features[rows], labels[rows], n_classes, range(width))
                if tree.feature[node] == LEAF:
                    if len(np.unique(labels[rows])) > 1:
                        assert expected is None
                    continue
                assert expected is not None
                assert (tree.feature[node], tree.threshold[node]) == expected[:2]
                goes_left = features[rows, tree.feature[node]] <= tree.threshold[node]
                stack.append((tree.left[node], rows[goes_left]))
                stack.append((tree.right[node], rows[~goes_left]))


class TestGrowTree:
    """Tests for single trees."""

    def test_xor_layout(self, xor_data):
        """Test the depth-first node layout on XOR."""
        features, labels = xor_data
        tree = grow_tree(features, labels, 2, ForestParams(), seed=0)
        assert tree.depth == 2
        assert tree.leaf_count == 4
        assert (tree.left[0], tree.right[0]) == (1, 2)
        assert tree.left[1] == 3
        assert tree.feature[3] == LEAF
        assert list(tree.counts[0]) == [2, 2]
        np.testing.assert_array_equal(tree.counts[tree.apply(features)].argmax(axis=1), labels)

    def test_max_depth(self, tiny_dataset):
        """Test trees never exceed the depth limit."""
        features, labels, vocabulary = dataset_arrays(tiny_dataset)
        for seed in range(5):
            tree = grow_tree(features, labels, len(vocabulary), ForestParams(max_depth=3), seed)
            assert tree.depth <= 3

    def test_pure_leaves_when_unlimited(self, tiny_dataset):
        """Test unlimited depth fits distinct training points exactly."""
        features, labels, vocabulary = dataset_arrays(tiny_dataset)
        tree = grow_tree(features, labels, len(vocabulary), ForestParams(), seed=1)
        leaves = tree.counts[tree.feature == LEAF]
        assert ((leaves > 0).sum(axis=1) == 1).all()

    def test_empty(self):
        """Test growing on zero samples fails."""
        with pytest.raises(ForestError):
            grow_tree(np.zeros((0, 2)), np.zeros(0, dtype=np.int64), 2, ForestParams(), 0)


class TestRandomForest:
    """Tests for training and prediction."""

    def test_xor_unlimited_depth(self, xor_data):
        """Test unlimited-depth trees fit XOR."""
        features, labels = xor_data
        forest = train_forest(features, labels, ("a", "b"), ForestParams(trees=25, bootstrap=False, seed=1))
        predicted = forest.predict_batch(features)
        assert list(predicted) == ["a", "b", "b", "a"]

    def test_xor_stumps(self, xor_data):
        """Test depth-one trees cannot fit XOR."""
        features, labels = xor_data
        params = ForestParams(trees=25, bootstrap=False, max_depth=1, seed=1)
        predicted = train_forest(features, labels, ("a", "b"), params).predict_batch(features)
        accuracy = np.mean(predicted == np.array(["a", "b", "b", "a"], dtype=object))
        assert accuracy <= 0.75

    def test_vote_tie_goes_to_lower_index(self, xor_data):
        """Test an even vote predicts the first vocabulary label."""
        features, labels = xor_data
        params = ForestParams(trees=4, bootstrap=False, max_depth=1, seed=1)
        label, fractions = train_forest(features, labels, ("a", "b"), params).predict(features[1])
        assert label == "a"
        assert fractions == {"a": 0.5, "b": 0.5}

    def test_vote_fractions_sum_to_one(self, tiny_dataset, small_forest_params):
        """Test every row of vote fractions is a distribution."""
        features, labels, vocabulary = dataset_arrays(tiny_dataset)
        forest = train_forest(features, labels, vocabulary, small_forest_params)
        proba = forest.predict_proba(features)
        assert proba.shape == (len(tiny_dataset), len(vocabulary))
        np.testing.assert_allclose(proba.sum(axis=1), 1.0)

    def test_deterministic(self, tiny_dataset, small_forest_params):
        """Test the same seed grows the same forest."""
        features, labels, vocabulary = dataset_arrays(tiny_dataset)
        first = train_forest(features, labels, vocabulary, small_forest_params)
        second = train_forest(features, labels, vocabulary, small_forest_params)
        assert first.same_structure(second)

    def test_worker_count_irrelevant(self, tiny_dataset, small_forest_params):
        """Test concurrent training grows the same trees."""
        features, labels, vocabulary = dataset_arrays(tiny_dataset)
        serial = train_forest(features, labels, vocabulary, small_forest_params)
        parallel = train_forest(features, labels, vocabulary, small_forest_params, workers=4)
        assert serial.same_structure(parallel)

    def test_seed_changes_forest(self, tiny_dataset, small_forest_params):
        """Test a different seed grows different trees."""
        features, labels, vocabulary = dataset_arrays(tiny_dataset)
        first = train_forest(features, labels, vocabulary, small_forest_params)
        other = train_forest(features, labels, vocabulary, small_forest_params.model_copy(update={"seed": 4}))
        assert not first.same_structure(other)

    def test_learns_synthetic_labels(self, tiny_dataset):
        """Test well-separated synthetic data is learned well above chance."""
        features, labels, vocabulary = dataset_arrays(tiny_dataset)
        forest = train_forest(features, labels, vocabulary, ForestParams(trees=15, seed=2))
        accuracy = np.mean(forest.predict_batch(features) == tiny_dataset.labels[Aspect.WE])
        assert accuracy > 0.9

    def test_width_mismatch(self, xor_data):
        """Test prediction rejects vectors of the wrong width."""
        features, labels = xor_data
        forest = train_forest(features, labels, ("a", "b"), ForestParams(trees=2))
        with pytest.raises(ForestError, match="width 2"):
            forest.predict(np.zeros(3))

    @pytest.mark.parametrize(
        ("features", "labels"),
        [
            (np.zeros((0, 2)), np.zeros(0, dtype=np.int64)),
            (np.zeros((3, 2)), np.array([0, 1])),
            (np.array([[0.0, np.nan], [1.0, 1.0]]), np.array([0, 1])),
            (np.zeros((2, 2)), np.array([0, 2])),
        ],
    )
    def test_invalid_training_input(self, features, labels):
        """Test empty, mismatched, non-finite and out-of-vocabulary input."""
        with pytest.raises(ForestError):
            train_forest(features, labels, ("a", "b"), ForestParams(trees=2))


class TestForestParams:
    """Tests for hyperparameters and seed derivation."""

    def test_features_per_split(self):
        """Test the square-root default and the explicit cap."""
        assert ForestParams().features_per_split(122) == 12
        assert ForestParams().features_per_split(1) == 1
        assert ForestParams(max_features=500).features_per_split(30) == 30

    def test_derive_seed(self):
        """Test derived seeds are stable and differ per key."""
        assert derive_seed(7, 0) == derive_seed(7, 0)
        assert len({derive_seed(7, t) for t in range(50)}) == 50
        assert derive_seed(7, 2, 1) != derive_seed(7, 1, 2)


class TestTuneDepth:
    """Tests for validation-split depth tuning."""

    def test_singleton_grid(self, tiny_dataset, small_forest_params):
        """Test a one-depth grid returns that depth."""
        features, labels, vocabulary = dataset_arrays(tiny_dataset)
        assert tune_depth(features, labels, vocabulary, [3], small_forest_params, seed=0) == 3

    def test_ties_prefer_shallow(self):
        """Test equally good depths resolve to the smallest, with unlimited largest."""
        features = np.arange(40, dtype=np.float64)[:, None]
        labels = (np.arange(40) >= 20).astype(np.int64)
        params = ForestParams(trees=3, bootstrap=False)
        assert tune_depth(features, labels, ("lo", "hi"), [None, 4, 1], params, seed=0) == 1

    def test_too_few_records(self, xor_data):
        """Test tuning needs at least four records."""
        features, labels = xor_data
        with pytest.raises(ForestError, match="at least 4"):
            tune_depth(features[:3], labels[:3], ("a", "b"), [1, 2], ForestParams(trees=2), seed=0)

    def test_empty_grid(self, xor_data):
        """Test an empty grid is rejected."""
        features, labels = xor_data
        with pytest.raises(ForestError, match="empty"):
            tune_depth(features, labels, ("a", "b"), [], ForestParams(trees=2), seed=0)


class TestStorage:
    """Tests for the model file format."""

    def test_round_trip(self, tiny_dataset, small_forest_params, workspace):
        """Test a loaded forest predicts exactly like the saved one."""
        features, labels, vocabulary = dataset_arrays(tiny_dataset)
        forest = train_forest(features, labels, vocabulary, small_forest_params)
        path = workspace / "we.model"
        save_forest(forest, path)
        loaded = load_forest(path)
        assert loaded.same_structure(forest)
        probe = np.random.default_rng(0).normal(size=(1000, tiny_dataset.width))
        np.testing.assert_array_equal(loaded.predict_proba(probe), forest.predict_proba(probe))

    def test_version_mismatch(self, workspace):
        """Test an archive from another format version is rejected."""
        path = workspace / "old.model"
        with open(path, "wb") as f:
            np.savez(f, format_version=np.array("contextrec-forest/0"))
        with pytest.raises(ModelFormatError, match="format version"):
            load_forest(path)

    def test_not_an_archive(self, workspace):
        """Test garbage files are rejected."""
        path = workspace / "garbage.model"
        path.write_bytes(b"not a model")
        with pytest.raises(ModelFormatError):
            load_forest(path)

    def test_missing_tree_arrays(self, xor_data, workspace):
        """Test an archive lacking tree arrays is rejected."""
        features, labels = xor_data
        forest = train_forest(features, labels, ("a", "b"), ForestParams(trees=2))
        path = workspace / "partial.model"
        with open(path, "wb") as f:
            np.savez(
                f,
                format_version=np.array("contextrec-forest/1"),
                params=np.array(forest.params.model_dump_json()),
                vocabulary=np.array(forest.vocabulary),
                seeds=np.array(forest.seeds, dtype=np.uint64),
                width=np.array(2),
            )
        with pytest.raises(ModelFormatError, match="malformed"):
            load_forest(path)
