"""Tests for encoding, folds, metrics and the cross-validation runner."""

from dataclasses import replace

import numpy as np
import pytest

from contextrec.core.errors import ExperimentError, MetricError
from contextrec.experiment import (
    augment,
    augment_matrix,
    augmented_names,
    input_configurations,
    kfold,
    make_spec,
    micro_f1,
    one_hot,
    per_label_f1,
    run_arms,
    run_experiment,
    stratified_kfold,
)
from contextrec.forest import ForestParams
from contextrec.ingestion import Dataset, Record
from contextrec.ontology import Aspect

VOCABULARIES = {
    Aspect.WE: tuple(f"place_{i}" for i in range(9)),
    Aspect.WA: tuple(f"activity_{i}" for i in range(12)),
    Aspect.WO: tuple(f"company_{i}" for i in range(5)),
}


@pytest.fixture
def record():
    return Record(
        user="u",
        start=0,
        features=np.arange(122, dtype=np.float64),
        mask=np.zeros(122, dtype=bool),
        labels={Aspect.WE: "place_3", Aspect.WA: "activity_0", Aspect.WO: "company_4"},
    )


@pytest.fixture
def quick_spec():
    """Cheap experiment settings for the tiny dataset."""
    return dict(forest=ForestParams(trees=5), depth_grid=[2, None], seed=5)


class TestEncoding:
    """Tests for one-hot augmentation."""

    def test_one_hot(self):
        """Test one position is set."""
        np.testing.assert_array_equal(one_hot("b", ("a", "b", "c")), [0.0, 1.0, 0.0])

    def test_one_hot_unknown_label(self):
        """Test labels outside the vocabulary are rejected."""
        with pytest.raises(ExperimentError, match="'z'"):
            one_hot("z", ("a", "b"))

    def test_augment_width(self, record):
        """Test WE and WO blocks append 9 + 5 columns after the 122 sensor features."""
        vector = augment(record, [Aspect.WE, Aspect.WO], VOCABULARIES)
        assert vector.shape == (136,)
        np.testing.assert_array_equal(vector[:122], record.features)
        assert vector[122 + 3] == 1.0
        assert vector[122:131].sum() == 1.0
        assert vector[131 + 4] == 1.0

    def test_block_order_is_fixed(self, record):
        """Test the requested order does not change the layout."""
        forward = augment(record, [Aspect.WE, Aspect.WO], VOCABULARIES)
        backward = augment(record, [Aspect.WO, Aspect.WE], VOCABULARIES)
        np.testing.assert_array_equal(forward, backward)

    def test_no_aspects(self, record):
        """Test the baseline arm keeps the sensor features only."""
        np.testing.assert_array_equal(augment(record, [], VOCABULARIES), record.features)

    def test_only_recognized_aspects(self, record):
        """Test TIME and WI cannot be appended."""
        with pytest.raises(ExperimentError):
            augment(record, [Aspect.TIME], VOCABULARIES)

    def test_matrix_matches_rows(self, tiny_dataset):
        """Test the matrix form agrees with augmenting each record."""
        aspects = [Aspect.WA, Aspect.WO]
        matrix = augment_matrix(tiny_dataset.features, tiny_dataset.labels, aspects, tiny_dataset.vocabularies)
        for index in (0, 17, 119):
            row = augment(tiny_dataset.record(index), aspects, tiny_dataset.vocabularies)
            np.testing.assert_array_equal(matrix[index], row)

    def test_names(self):
        """Test appended columns are named after their aspect and label."""
        names = augmented_names(["f"], [Aspect.WO], {Aspect.WO: ("alone", "friend")})
        assert names == ["f", "WO=alone", "WO=friend"]


class TestFolds:
    """Tests for k-fold partitions."""

    def test_random_partitions(self):
        """Test folds partition the indices with sizes differing by at most one."""
        rng = np.random.default_rng(9)
        for _ in range(100):
            k = int(rng.integers(2, 11))
            n = int(rng.integers(k, 400))
            folds = kfold(n, k, seed=int(rng.integers(1000)))
            assert len(folds) == k
            np.testing.assert_array_equal(np.sort(np.concatenate(folds)), np.arange(n))
            sizes = [len(f) for f in folds]
            assert max(sizes) - min(sizes) <= 1
            assert all((np.diff(f) > 0).all() for f in folds)

    def test_fold_sizes(self):
        """Test 23309 records split into four folds of 4662 and one of 4661."""
        assert [len(f) for f in kfold(23309, 5, seed=1)] == [4662, 4662, 4662, 4662, 4661]

    def test_seeded(self):
        """Test the same seed gives the same folds."""
        first, second = kfold(50, 5, seed=3), kfold(50, 5, seed=3)
        assert all(np.array_equal(a, b) for a, b in zip(first, second))

    @pytest.mark.parametrize(("n", "k"), [(10, 1), (3, 5)])
    def test_invalid(self, n, k):
        """Test too few folds or records."""
        with pytest.raises(ExperimentError):
            kfold(n, k)

    def test_stratified(self):
        """Test each label is spread evenly over the folds."""
        labels = np.array(["a"] * 23 + ["b"] * 11 + ["c"] * 6)
        folds = stratified_kfold(labels, 5, seed=0)
        np.testing.assert_array_equal(np.sort(np.concatenate(folds)), np.arange(40))
        for label in ("a", "b", "c"):
            counts = [int((labels[f] == label).sum()) for f in folds]
            assert max(counts) - min(counts) <= 1


class TestMetrics:
    """Tests for micro and per-label F1."""

    def test_micro_f1_is_accuracy(self):
        """Test single-label micro-F1 equals accuracy."""
        rng = np.random.default_rng(4)
        for _ in range(1000):
            n = int(rng.integers(1, 30))
            truth = rng.integers(4, size=n)
            predicted = rng.integers(4, size=n)
            assert abs(micro_f1(truth, predicted) - np.mean(truth == predicted)) <= 1e-12

    def test_worked_example(self):
        """Test AABB against ABBB."""
        truth, predicted = list("AABB"), list("ABBB")
        assert micro_f1(truth, predicted) == pytest.approx(0.75)
        scores = per_label_f1(truth, predicted, ["A", "B", "C"])
        assert scores["A"].f1 == pytest.approx(2 / 3)
        assert scores["B"].f1 == pytest.approx(0.8)
        assert scores["C"].f1 == 0.0
        assert not scores["C"].supported
        assert scores["A"].supported

    def test_empty(self):
        """Test empty sequences are rejected."""
        with pytest.raises(MetricError):
            micro_f1([], [])

    def test_length_mismatch(self):
        """Test unequal lengths are rejected."""
        with pytest.raises(MetricError):
            per_label_f1(["a"], ["a", "b"], ["a", "b"])


class TestExperimentSpec:
    """Tests for arm validation."""

    def test_inputs_are_ordered(self):
        """Test inputs are stored in WE, WA, WO order."""
        spec = make_spec(target="WA", inputs=["WO", "WE"])
        assert spec.inputs == (Aspect.WE, Aspect.WO)
        assert spec.arm == "sensors+WE+WO"
        assert make_spec(target="WA").arm == "sensors"

    @pytest.mark.parametrize(
        "values",
        [
            {"target": "WA", "inputs": ["WA"]},
            {"target": "TIME"},
            {"target": "WE", "inputs": ["WI"]},
            {"target": "WE", "inputs": ["WO", "WO"]},
            {"target": "WE", "depth_grid": [0]},
            {"target": "WE", "depth_grid": []},
            {"target": "WE", "folds": 1},
        ],
    )
    def test_invalid(self, values):
        """Test invalid arms raise ExperimentError."""
        with pytest.raises(ExperimentError):
            make_spec(**values)

    def test_configurations(self):
        """Test the four arms of a target."""
        assert input_configurations(Aspect.WA) == [(), (Aspect.WE,), (Aspect.WO,), (Aspect.WE, Aspect.WO)]


class TestRunExperiment:
    """Tests for cross-validated runs on the tiny synthetic dataset."""

    def test_report_shape(self, tiny_dataset, quick_spec):
        """Test folds, users and summary fields of a report."""
        report = run_experiment(tiny_dataset, make_spec(target="WA", inputs=["WE"], **quick_spec))
        assert [f.index for f in report.folds] == [0, 1, 2, 3, 4]
        assert sum(f.size for f in report.folds) == 120
        assert list(report.per_user) == ["u000", "u001", "u002", "u003"]
        assert report.summary.user_mean_f1 == pytest.approx(np.mean(list(report.per_user.values())))
        assert report.depth in (2, None)
        assert all(f.depth == report.depth for f in report.folds)
        assert report.digest == tiny_dataset.digest()
        assert set(report.per_label) == set(tiny_dataset.vocabularies[Aspect.WA])
        assert 0.0 <= report.summary.pooled_f1 <= 1.0

    def test_deterministic(self, tiny_dataset, quick_spec):
        """Test two runs give byte-identical reports."""
        spec = make_spec(target="WO", **quick_spec)
        assert run_experiment(tiny_dataset, spec).model_dump_json() == run_experiment(tiny_dataset, spec).model_dump_json()

    def test_worker_count_irrelevant(self, tiny_dataset, quick_spec):
        """Test concurrent folds give the same report."""
        spec = make_spec(target="WE", inputs=["WA", "WO"], **quick_spec)
        serial = run_experiment(tiny_dataset, spec, workers=1)
        parallel = run_experiment(tiny_dataset, spec, workers=3)
        assert serial.model_dump_json() == parallel.model_dump_json()

    def test_fixed_depth(self, tiny_dataset, quick_spec):
        """Test a given depth skips tuning."""
        report = run_experiment(tiny_dataset, make_spec(target="WA", **quick_spec), depth=3)
        assert report.depth == 3
        assert {f.depth for f in report.folds} == {3}

    def test_nested_protocol(self, tiny_dataset, quick_spec):
        """Test nested runs tune a depth inside every fold."""
        report = run_experiment(tiny_dataset, make_spec(target="WA", protocol="nested", **quick_spec))
        assert all(f.depth in (2, None) for f in report.folds)
        assert report.depth in {f.depth for f in report.folds}

    def test_predicted_labels(self, tiny_dataset, quick_spec):
        """Test inputs can come from sensors-only predictions."""
        spec = make_spec(target="WA", inputs=["WE"], label_source="predicted", **quick_spec)
        report = run_experiment(tiny_dataset, spec)
        assert report.spec.label_source == "predicted"
        assert 0.0 <= report.summary.user_mean_f1 <= 1.0

    def test_stratified_folds(self, tiny_dataset, quick_spec):
        """Test stratified folding still covers every record once."""
        report = run_experiment(tiny_dataset, make_spec(target="WE", stratified=True, **quick_spec))
        assert sum(f.size for f in report.folds) == 120

    def test_missing_aspect(self, tiny_dataset, quick_spec):
        """Test a dataset without the input aspect is rejected."""
        labels = {a: tiny_dataset.labels[a] for a in (Aspect.WE, Aspect.WA)}
        vocabularies = {a: tiny_dataset.vocabularies[a] for a in (Aspect.WE, Aspect.WA)}
        partial = replace(tiny_dataset, labels=labels, vocabularies=vocabularies)
        with pytest.raises(ExperimentError, match="no WO labels"):
            run_experiment(partial, make_spec(target="WA", inputs=["WO"], **quick_spec))

    def test_arms_share_depth(self, tiny_dataset, quick_spec):
        """Test the four arms of a target reuse one tuned depth."""
        reports = run_arms(tiny_dataset, Aspect.WO, make_spec(target="WO", **quick_spec))
        assert list(reports) == input_configurations(Aspect.WO)
        assert len({report.depth for report in reports.values()}) == 1
        assert reports[(Aspect.WE, Aspect.WA)].spec.arm == "sensors+WE+WA"

    @pytest.mark.parametrize("protocol", ["cv5", "nested"])
    def test_test_fold_never_trains(self, tiny_dataset, quick_spec, monkeypatch, protocol):
        """Test no test-fold record is part of its own fold's training rows."""
        taken = []
        original = Dataset.subset

        def recording(self, indices):
            taken.append(np.asarray(indices))
            return original(self, indices)

        monkeypatch.setattr(Dataset, "subset", recording)
        spec = make_spec(target="WA", inputs=["WO"], protocol=protocol, **quick_spec)
        run_experiment(tiny_dataset, spec, workers=1)

        pairs = list(zip(taken[::2], taken[1::2]))
        assert len(pairs) == 5
        for train, test in pairs:
            assert np.intersect1d(train, test).size == 0
            np.testing.assert_array_equal(np.sort(np.concatenate([train, test])), np.arange(len(tiny_dataset)))
