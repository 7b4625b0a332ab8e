"""Dependence diagnostics between label sequences."""

from collections.abc import Sequence

from sklearn.metrics import mutual_info_score

from contextrec.core.errors import MetricError


def mutual_information(labels_a: Sequence, labels_b: Sequence) -> float:
    """
    Plug-in mutual information of two label sequences, in nats.

    Raises:
        MetricError: On empty or unequal-length input
    """
    if len(labels_a) != len(labels_b):
        raise MetricError(f"label sequences differ in length ({len(labels_a)} vs {len(labels_b)})")
    if len(labels_a) == 0:
        raise MetricError("mutual information of empty sequences is undefined")
    return float(mutual_info_score(list(labels_a), list(labels_b)))
