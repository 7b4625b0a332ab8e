"""Fixed-width feature records and their table format."""

import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from contextrec.core.errors import ExperimentError, FeatureError
from contextrec.core.manifest import read_manifest
from contextrec.ontology.model import RECOGNIZED_ASPECTS, Aspect

logger = logging.getLogger(__name__)

MISSING_SUFFIX = "_missing"
KEY_COLUMNS = ["user", "window_start"]


@dataclass(frozen=True)
class Record:
    """One annotated window: features, missing-mask and WE/WA/WO labels."""

    user: str
    start: int
    features: np.ndarray
    mask: np.ndarray
    labels: dict[Aspect, str]


@dataclass
class Dataset:
    """Columnar store of records sharing one feature layout."""

    users: np.ndarray
    starts: np.ndarray
    features: np.ndarray
    mask: np.ndarray
    labels: dict[Aspect, np.ndarray]
    feature_names: list[str]
    vocabularies: dict[Aspect, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        n, width = self.features.shape
        if self.mask.shape != (n, width):
            raise FeatureError(f"mask shape {self.mask.shape} does not match features {(n, width)}")
        if len(self.feature_names) != width:
            raise FeatureError(f"{len(self.feature_names)} feature names for width {width}")
        if len(self.users) != n or len(self.starts) != n:
            raise FeatureError("users/starts length does not match the record count")
        for aspect, column in self.labels.items():
            if len(column) != n:
                raise FeatureError(f"{aspect} labels have length {len(column)}, expected {n}")
        for aspect, column in self.labels.items():
            if aspect not in self.vocabularies:
                self.vocabularies[aspect] = tuple(sorted(set(column.tolist())))

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def width(self) -> int:
        return self.features.shape[1]

    def record(self, index: int) -> Record:
        return Record(
            user=str(self.users[index]),
            start=int(self.starts[index]),
            features=self.features[index],
            mask=self.mask[index],
            labels={aspect: str(column[index]) for aspect, column in self.labels.items()},
        )

    def records(self):
        for index in range(len(self)):
            yield self.record(index)

    def subset(self, indices: np.ndarray) -> "Dataset":
        """Rows ``indices``; vocabularies are kept whole."""
        return Dataset(
            users=self.users[indices],
            starts=self.starts[indices],
            features=self.features[indices],
            mask=self.mask[indices],
            labels={aspect: column[indices] for aspect, column in self.labels.items()},
            feature_names=list(self.feature_names),
            vocabularies=dict(self.vocabularies),
        )

    def require(self, aspect: Aspect) -> np.ndarray:
        """Label column of ``aspect``; ExperimentError if the dataset lacks it."""
        if aspect not in self.labels:
            raise ExperimentError(f"dataset has no {aspect} labels")
        return self.labels[aspect]

    def encoded(self, aspect: Aspect) -> np.ndarray:
        """Label indices of ``aspect`` into its vocabulary."""
        vocabulary = self.vocabularies[aspect]
        index = {label: i for i, label in enumerate(vocabulary)}
        column = self.require(aspect)
        try:
            return np.fromiter((index[label] for label in column), dtype=np.int64, count=len(column))
        except KeyError as e:
            raise ExperimentError(f"{aspect} label {e.args[0]!r} missing from the vocabulary") from e

    def digest(self) -> str:
        """SHA-256 over the canonical content; masked entries hash as zero."""
        h = hashlib.sha256()
        h.update("\x1f".join(self.feature_names).encode())
        h.update("\x1f".join(str(u) for u in self.users).encode())
        h.update(np.ascontiguousarray(self.starts, dtype="<i8").tobytes())
        h.update(np.ascontiguousarray(np.where(self.mask, 0.0, self.features), dtype="<f8").tobytes())
        h.update(np.packbits(self.mask).tobytes())
        for aspect in RECOGNIZED_ASPECTS:
            if aspect in self.labels:
                h.update(aspect.value.encode())
                h.update("\x1f".join(self.labels[aspect].tolist()).encode())
                h.update("\x1f".join(self.vocabularies[aspect]).encode())
        return h.hexdigest()

    @classmethod
    def from_records(
        cls,
        records: list[Record],
        feature_names: list[str],
        vocabularies: dict[Aspect, tuple[str, ...]] | None = None,
    ) -> "Dataset":
        width = len(feature_names)
        aspects = [a for a in RECOGNIZED_ASPECTS if records and a in records[0].labels]
        return cls(
            users=np.array([r.user for r in records], dtype=object),
            starts=np.array([r.start for r in records], dtype=np.int64),
            features=np.array([r.features for r in records], dtype=np.float64).reshape(len(records), width),
            mask=np.array([r.mask for r in records], dtype=bool).reshape(len(records), width),
            labels={a: np.array([r.labels[a] for r in records], dtype=object) for a in aspects},
            feature_names=list(feature_names),
            vocabularies=dict(vocabularies or {}),
        )


def write_records(dataset: Dataset, path: Path) -> None:
    """
    Write the record table.

    Columns: ``user, window_start``, one column per labeled aspect (WE, WA,
    WO), the feature columns, then one ``<feature>_missing`` 0/1 column per
    feature. Masked feature cells are empty.
    """
    frame = pd.DataFrame({"user": dataset.users, "window_start": dataset.starts})
    for aspect in RECOGNIZED_ASPECTS:
        if aspect in dataset.labels:
            frame[aspect.value] = dataset.labels[aspect]
    values = np.where(dataset.mask, np.nan, dataset.features)
    features = pd.DataFrame(values, columns=dataset.feature_names)
    missing = pd.DataFrame(
        dataset.mask.astype(np.int8),
        columns=[name + MISSING_SUFFIX for name in dataset.feature_names],
    )
    frame = pd.concat([frame, features, missing], axis=1)
    frame.to_csv(path, index=False, na_rep="", lineterminator="\n")


def read_records(path: Path) -> Dataset:
    """
    Read a record table written by ``write_records``.

    Vocabularies come from the sidecar manifest when one exists, otherwise
    from the sorted distinct labels.
    """
    try:
        header = pd.read_csv(path, nrows=0).columns.tolist()
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise FeatureError(f"cannot read records {path}: {e}") from e

    label_columns = [a.value for a in RECOGNIZED_ASPECTS if a.value in header]
    missing_columns = [c for c in header if c.endswith(MISSING_SUFFIX)]
    feature_names = [c for c in header if c not in KEY_COLUMNS + label_columns + missing_columns]
    if [name + MISSING_SUFFIX for name in feature_names] != missing_columns:
        raise FeatureError(f"{path}: every feature column needs a matching {MISSING_SUFFIX} column")

    dtypes = {"user": str, "window_start": np.int64}
    dtypes.update({c: str for c in label_columns})
    dtypes.update({c: np.float64 for c in feature_names})
    dtypes.update({c: np.int8 for c in missing_columns})
    frame = pd.read_csv(
        path,
        dtype=dtypes,
        keep_default_na=False,
        na_values={c: [""] for c in feature_names},
        float_precision="round_trip",
    )

    mask = frame[missing_columns].to_numpy(dtype=bool) if feature_names else np.zeros((len(frame), 0), bool)
    features = frame[feature_names].to_numpy(dtype=np.float64)
    if np.isnan(features[~mask]).any():
        raise FeatureError(f"{path}: empty feature cell without its {MISSING_SUFFIX} flag")

    vocabularies: dict[Aspect, tuple[str, ...]] = {}
    manifest = read_manifest(Path(path))
    if manifest is not None:
        for aspect, labels in manifest.extra.get("vocabularies", {}).items():
            vocabularies[Aspect(aspect)] = tuple(labels)

    dataset = Dataset(
        users=frame["user"].to_numpy(dtype=object),
        starts=frame["window_start"].to_numpy(dtype=np.int64),
        features=features,
        mask=mask,
        labels={Aspect(c): frame[c].to_numpy(dtype=object) for c in label_columns},
        feature_names=feature_names,
        vocabularies=vocabularies,
    )
    logger.info("Read %d records of width %d from %s", len(dataset), dataset.width, path)
    return dataset
