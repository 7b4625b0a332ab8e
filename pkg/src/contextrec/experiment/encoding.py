"""One-hot encoding of aspect labels appended to sensor features."""

from collections.abc import Iterable, Mapping

import numpy as np

from contextrec.core.errors import ExperimentError
from contextrec.ingestion.dataset import Record
from contextrec.ontology.model import RECOGNIZED_ASPECTS, Aspect


def canonical_inputs(aspects: Iterable[Aspect]) -> tuple[Aspect, ...]:
    """Input aspects in the fixed WE, WA, WO block order."""
    requested = {Aspect(a) for a in aspects}
    unknown = requested.difference(RECOGNIZED_ASPECTS)
    if unknown:
        raise ExperimentError(f"aspects {sorted(unknown)} cannot be used as inputs")
    return tuple(a for a in RECOGNIZED_ASPECTS if a in requested)


def one_hot(label: str, vocabulary: tuple[str, ...]) -> np.ndarray:
    try:
        position = vocabulary.index(label)
    except ValueError:
        raise ExperimentError(f"label {label!r} is not in the vocabulary") from None
    vector = np.zeros(len(vocabulary))
    vector[position] = 1.0
    return vector


def augment(
    record: Record,
    aspects: Iterable[Aspect],
    vocabularies: Mapping[Aspect, tuple[str, ...]],
) -> np.ndarray:
    """
    Sensor features of ``record`` followed by one-hot blocks of its labels.

    Raises:
        ExperimentError: If the record lacks a label of a requested aspect
    """
    blocks = [np.asarray(record.features, dtype=np.float64)]
    for aspect in canonical_inputs(aspects):
        if aspect not in record.labels:
            raise ExperimentError(f"record of {record.user} at {record.start} has no {aspect} label")
        blocks.append(one_hot(record.labels[aspect], tuple(vocabularies[aspect])))
    return np.concatenate(blocks)


def encode_block(labels: np.ndarray, vocabulary: tuple[str, ...]) -> np.ndarray:
    """``(n, |vocabulary|)`` one-hot matrix of a label column."""
    index = {label: i for i, label in enumerate(vocabulary)}
    try:
        positions = np.fromiter((index[label] for label in labels), dtype=np.int64, count=len(labels))
    except KeyError as e:
        raise ExperimentError(f"label {e.args[0]!r} is not in the vocabulary") from e
    return np.eye(len(vocabulary))[positions]


def augment_matrix(
    features: np.ndarray,
    labels: Mapping[Aspect, np.ndarray],
    aspects: Iterable[Aspect],
    vocabularies: Mapping[Aspect, tuple[str, ...]],
) -> np.ndarray:
    """Row-wise ``augment`` over a feature matrix and its label columns."""
    blocks = [np.asarray(features, dtype=np.float64)]
    for aspect in canonical_inputs(aspects):
        if aspect not in labels:
            raise ExperimentError(f"no {aspect} labels to augment with")
        blocks.append(encode_block(labels[aspect], tuple(vocabularies[aspect])))
    return np.hstack(blocks)


def augmented_names(
    feature_names: list[str],
    aspects: Iterable[Aspect],
    vocabularies: Mapping[Aspect, tuple[str, ...]],
) -> list[str]:
    names = list(feature_names)
    for aspect in canonical_inputs(aspects):
        names += [f"{aspect.value}={label}" for label in vocabularies[aspect]]
    return names
