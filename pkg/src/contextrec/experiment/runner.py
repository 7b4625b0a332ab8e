"""Cross-validated recognition runs with and without other aspects as inputs."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from contextrec.core.errors import ExperimentError
from contextrec.experiment.encoding import augment_matrix
from contextrec.experiment.folds import kfold, stratified_kfold
from contextrec.experiment.metrics import micro_f1, per_label_f1
from contextrec.forest import ForestParams, derive_seed, train_forest, tune_depth
from contextrec.ingestion.dataset import Dataset
from contextrec.ingestion.impute import ImputePolicy, impute
from contextrec.ontology.loader import describe_validation_error
from contextrec.ontology.model import RECOGNIZED_ASPECTS, Aspect

logger = logging.getLogger(__name__)

# Seed streams derived from the experiment seed
TUNING_STREAM = 1
FOLD_STREAM = 2
PREDICTED_STREAM = 3

DEFAULT_DEPTH_GRID: list[int | None] = [2, 4, 6, 8, 12, 16, 24, None]

# Columns of the improvement table, in display order
TABLE_TARGETS = (Aspect.WA, Aspect.WE, Aspect.WO)


class ExperimentSpec(BaseModel):
    """One arm: a target aspect and the aspects given as extra inputs."""

    model_config = ConfigDict(frozen=True)

    target: Aspect
    inputs: tuple[Aspect, ...] = ()
    protocol: Literal["cv5", "nested"] = "cv5"
    forest: ForestParams = ForestParams()
    depth_grid: list[int | None] = Field(default_factory=lambda: list(DEFAULT_DEPTH_GRID), min_length=1)
    folds: int = Field(default=5, ge=2)
    seed: int = Field(default=7, ge=0)
    label_source: Literal["truth", "predicted"] = "truth"
    stratified: bool = False
    append_mask_features: bool = False

    @field_validator("inputs", mode="before")
    @classmethod
    def _order_inputs(cls, inputs: Any) -> tuple[Aspect, ...]:
        requested = [Aspect(a) for a in inputs]
        return tuple(sorted(requested, key=lambda a: RECOGNIZED_ASPECTS.index(a) if a in RECOGNIZED_ASPECTS else 9))

    @field_validator("depth_grid")
    @classmethod
    def _check_grid(cls, grid: list[int | None]) -> list[int | None]:
        if any(depth is not None and depth < 1 for depth in grid):
            raise ValueError("depths must be positive (null for unlimited)")
        return grid

    @model_validator(mode="after")
    def _check_aspects(self) -> "ExperimentSpec":
        if self.target not in RECOGNIZED_ASPECTS:
            raise ValueError(f"{self.target} is not a recognized aspect")
        if self.target in self.inputs:
            raise ValueError(f"target {self.target} cannot also be an input")
        if len(set(self.inputs)) != len(self.inputs):
            raise ValueError("input aspects repeat")
        if any(a not in RECOGNIZED_ASPECTS for a in self.inputs):
            raise ValueError("inputs must be among WE, WA and WO")
        return self

    @property
    def arm(self) -> str:
        return arm_name(self.inputs)


def make_spec(**values: Any) -> ExperimentSpec:
    """Build an ExperimentSpec, raising ExperimentError on invalid values."""
    try:
        return ExperimentSpec(**values)
    except ValidationError as e:
        raise ExperimentError(describe_validation_error(e)) from e


def arm_name(inputs: tuple[Aspect, ...]) -> str:
    """``sensors`` for the baseline, else ``sensors+WE+WO`` style."""
    return "+".join(["sensors", *(a.value for a in inputs)])


class FoldScore(BaseModel):
    index: int
    size: int
    micro_f1: float
    depth: int | None


class LabelSummary(BaseModel):
    """Per-label F1 averaged over the users whose data contains the label."""

    f1: float
    users: int
    supported: bool


class ReportSummary(BaseModel):
    user_mean_f1: float
    pooled_f1: float
    fold_mean_f1: float


class ExperimentReport(BaseModel):
    """
    Scores of one arm.

    ``summary.user_mean_f1`` is the unweighted mean of the per-user scores;
    ``pooled_f1`` scores all out-of-fold predictions together.
    """

    spec: ExperimentSpec
    folds: list[FoldScore]
    per_user: dict[str, float]
    per_label: dict[str, LabelSummary]
    depth: int | None
    digest: str
    summary: ReportSummary


@dataclass(frozen=True)
class _FoldResult:
    index: int
    test: np.ndarray
    predicted: np.ndarray
    depth: int | None


def make_folds(dataset: Dataset, spec: ExperimentSpec) -> list[np.ndarray]:
    if spec.stratified:
        return stratified_kfold(dataset.require(spec.target), spec.folds, spec.seed)
    return kfold(len(dataset), spec.folds, spec.seed)


def tune_sensors_only(dataset: Dataset, spec: ExperimentSpec, workers: int = 1) -> int | None:
    """Depth tuned on sensor features alone, shared by every arm of a target."""
    policy = ImputePolicy(append_mask_features=spec.append_mask_features)
    filled = impute(dataset, policy)
    seed = derive_seed(spec.seed, TUNING_STREAM)
    return tune_depth(
        filled.features,
        dataset.encoded(spec.target),
        dataset.vocabularies[spec.target],
        spec.depth_grid,
        spec.forest.model_copy(update={"seed": seed}),
        seed,
        workers,
    )


def _predict_inputs(
    train: Dataset,
    test: Dataset,
    spec: ExperimentSpec,
    depth: int | None,
    fold: int,
) -> dict[Aspect, np.ndarray]:
    """Replace the test fold's input labels by sensors-only predictions."""
    labels = dict(test.labels)
    for position, aspect in enumerate(spec.inputs):
        params = spec.forest.model_copy(
            update={"max_depth": depth, "seed": derive_seed(spec.seed, PREDICTED_STREAM, fold, position)}
        )
        forest = train_forest(train.features, train.encoded(aspect), train.vocabularies[aspect], params)
        labels[aspect] = forest.predict_batch(test.features)
    return labels


def _run_fold(
    dataset: Dataset,
    spec: ExperimentSpec,
    folds: list[np.ndarray],
    index: int,
    depth: int | None | Literal["tune"],
) -> _FoldResult:
    test_index = folds[index]
    train_index = np.sort(np.concatenate([fold for j, fold in enumerate(folds) if j != index]))
    train, test = dataset.subset(train_index), dataset.subset(test_index)

    policy = ImputePolicy(append_mask_features=spec.append_mask_features)
    train_filled = impute(train, policy)
    test_filled = impute(test, policy, fit_on=train)

    if depth == "tune":
        depth = tune_sensors_only(train, spec.model_copy(update={"seed": derive_seed(spec.seed, TUNING_STREAM, index)}))

    test_labels = test.labels
    if spec.label_source == "predicted" and spec.inputs:
        test_labels = _predict_inputs(train_filled, test_filled, spec, depth, index)

    vocabularies = dataset.vocabularies
    x_train = augment_matrix(train_filled.features, train.labels, spec.inputs, vocabularies)
    x_test = augment_matrix(test_filled.features, test_labels, spec.inputs, vocabularies)
    params = spec.forest.model_copy(update={"max_depth": depth, "seed": derive_seed(spec.seed, FOLD_STREAM, index)})
    forest = train_forest(x_train, train.encoded(spec.target), vocabularies[spec.target], params)
    return _FoldResult(index=index, test=test_index, predicted=forest.predict_batch(x_test), depth=depth)


def run_experiment(
    dataset: Dataset,
    spec: ExperimentSpec,
    workers: int = 1,
    depth: int | None | Literal["tune"] = "tune",
) -> ExperimentReport:
    """
    Cross-validate one arm.

    Under ``cv5`` the depth is tuned once on a 75/25 split of the whole
    dataset (unless ``depth`` is given) and reused in every fold. Under
    ``nested`` it is tuned inside each fold's training part. Imputation
    medians are always fit on the training part of a fold.

    Args:
        dataset: Records with labels for the target and every input aspect
        spec: The arm to run
        workers: Folds run concurrently on this many threads
        depth: A pre-tuned maximum depth, or ``"tune"``

    Raises:
        ExperimentError: If the dataset lacks a requested aspect
    """
    truth = dataset.require(spec.target)
    for aspect in spec.inputs:
        dataset.require(aspect)
    vocabulary = dataset.vocabularies[spec.target]
    folds = make_folds(dataset, spec)

    if spec.protocol == "cv5" and depth == "tune":
        depth = tune_sensors_only(dataset, spec, workers)
    elif spec.protocol == "nested":
        depth = "tune"

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(lambda i: _run_fold(dataset, spec, folds, i, depth), range(len(folds))))

    predicted = np.empty(len(dataset), dtype=object)
    fold_scores = []
    for result in results:
        predicted[result.test] = result.predicted
        score = micro_f1(truth[result.test], result.predicted)
        fold_scores.append(FoldScore(index=result.index, size=len(result.test), micro_f1=score, depth=result.depth))
        logger.info("%s %s fold %d: micro-F1 %.4f", spec.target, spec.arm, result.index, score)

    per_user: dict[str, float] = {}
    label_scores: dict[str, list[float]] = {label: [] for label in vocabulary}
    for user in sorted(set(dataset.users.tolist())):
        rows = dataset.users == user
        per_user[user] = micro_f1(truth[rows], predicted[rows])
        for label, score in per_label_f1(truth[rows], predicted[rows], vocabulary).items():
            if score.supported:
                label_scores[label].append(score.f1)

    per_label = {
        label: LabelSummary(f1=float(np.mean(scores)) if scores else 0.0, users=len(scores), supported=bool(scores))
        for label, scores in label_scores.items()
    }
    if spec.protocol == "cv5":
        chosen = depth
    else:
        # most frequent per-fold depth, smallest on ties
        fold_depths = [r.depth for r in results]
        chosen = min(fold_depths, key=lambda d: (-fold_depths.count(d), float("inf") if d is None else d))

    report = ExperimentReport(
        spec=spec,
        folds=fold_scores,
        per_user=per_user,
        per_label=per_label,
        depth=chosen,
        digest=dataset.digest(),
        summary=ReportSummary(
            user_mean_f1=float(np.mean(list(per_user.values()))),
            pooled_f1=micro_f1(truth, predicted),
            fold_mean_f1=float(np.mean([f.micro_f1 for f in fold_scores])),
        ),
    )
    logger.info("%s %s: user-mean micro-F1 %.4f", spec.target, spec.arm, report.summary.user_mean_f1)
    return report


def input_configurations(target: Aspect) -> list[tuple[Aspect, ...]]:
    """Sensors only, each other aspect alone, then both other aspects."""
    others = tuple(a for a in RECOGNIZED_ASPECTS if a != target)
    return [(), *((a,) for a in others), others]


def run_arms(
    dataset: Dataset,
    target: Aspect,
    template: ExperimentSpec | None = None,
    workers: int = 1,
) -> dict[tuple[Aspect, ...], ExperimentReport]:
    """
    Run every input configuration for ``target`` with one shared depth.

    ``template`` supplies everything but the target and inputs.
    """
    target = Aspect(target)
    base = (template or ExperimentSpec(target=target)).model_copy(update={"target": target, "inputs": ()})
    depth: int | None | Literal["tune"] = "tune"
    if base.protocol == "cv5":
        dataset.require(target)
        depth = tune_sensors_only(dataset, base, workers)

    configurations = input_configurations(target)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        reports = list(
            pool.map(
                lambda inputs: run_experiment(dataset, base.model_copy(update={"inputs": inputs}), 1, depth),
                configurations,
            )
        )
    return dict(zip(configurations, reports))


def run_all(
    dataset: Dataset,
    template: ExperimentSpec | None = None,
    workers: int = 1,
) -> dict[Aspect, dict[tuple[Aspect, ...], ExperimentReport]]:
    """All arms for WA, WE and WO: the twelve runs behind the improvement table."""
    return {target: run_arms(dataset, target, template, workers) for target in TABLE_TARGETS}

