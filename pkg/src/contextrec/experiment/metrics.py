"""Micro-averaged and per-label F1 scores."""

from collections.abc import Sequence

import numpy as np
from pydantic import BaseModel
from sklearn.metrics import f1_score

from contextrec.core.errors import MetricError


class LabelScore(BaseModel):
    """One-vs-rest F1 of a label; ``supported`` is False when it never occurs."""

    f1: float
    supported: bool


def _check(truth: Sequence, predicted: Sequence) -> tuple[np.ndarray, np.ndarray]:
    if len(truth) != len(predicted):
        raise MetricError(f"{len(truth)} true labels but {len(predicted)} predictions")
    if len(truth) == 0:
        raise MetricError("F1 of an empty sequence is undefined")
    return np.asarray(truth), np.asarray(predicted)


def micro_f1(truth: Sequence, predicted: Sequence) -> float:
    """F1 from true/false positives and false negatives pooled over all labels."""
    truth, predicted = _check(truth, predicted)
    return float(f1_score(truth, predicted, average="micro"))


def per_label_f1(truth: Sequence, predicted: Sequence, vocabulary: Sequence[str]) -> dict[str, LabelScore]:
    """
    One-vs-rest F1 for every label of ``vocabulary``.

    A label absent from both sequences scores 0 and is flagged unsupported.
    """
    truth, predicted = _check(truth, predicted)
    vocabulary = list(vocabulary)
    scores = f1_score(truth, predicted, labels=vocabulary, average=None, zero_division=0)
    present = set(truth.tolist()) | set(predicted.tolist())
    return {
        label: LabelScore(f1=float(score), supported=label in present)
        for label, score in zip(vocabulary, scores)
    }
