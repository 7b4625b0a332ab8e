"""Versioned ``.npz`` model files."""

import json
import logging
import zipfile
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from contextrec.core.errors import ModelFormatError
from contextrec.forest.ensemble import RandomForest
from contextrec.forest.params import ForestParams
from contextrec.forest.tree import DecisionTree

logger = logging.getLogger(__name__)

FORMAT_VERSION = "contextrec-forest/1"
TREE_ARRAYS = ("feature", "threshold", "left", "right", "counts")


def save_forest(forest: RandomForest, path: Path) -> None:
    """
    Write ``forest`` as a flat archive of arrays.

    Keys: ``format_version``, ``params`` (JSON), ``vocabulary``, ``seeds``,
    ``width``, and ``tree{t}_{array}`` for every tree array.
    """
    arrays: dict[str, np.ndarray] = {
        "format_version": np.array(FORMAT_VERSION),
        "params": np.array(forest.params.model_dump_json()),
        "vocabulary": np.array(forest.vocabulary, dtype=np.str_),
        "seeds": np.array(forest.seeds, dtype=np.uint64),
        "width": np.array(forest.width, dtype=np.int64),
    }
    for t, tree in enumerate(forest.trees):
        for name in TREE_ARRAYS:
            arrays[f"tree{t}_{name}"] = getattr(tree, name)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # a file handle keeps numpy from appending ".npz" to the name
    with open(path, "wb") as f:
        np.savez_compressed(f, **arrays)
    logger.info("Saved %d-tree forest to %s", len(forest.trees), path)


def load_forest(path: Path) -> RandomForest:
    """
    Read a forest written by ``save_forest``.

    Raises:
        ModelFormatError: On an unreadable file, a version mismatch or
            missing arrays
    """
    try:
        archive = np.load(path, allow_pickle=False)
    except (OSError, ValueError, zipfile.BadZipFile) as e:
        raise ModelFormatError(f"cannot read model {path}: {e}") from e

    with archive:
        if "format_version" not in archive.files:
            raise ModelFormatError(f"{path}: no format_version entry")
        version = str(archive["format_version"])
        if version != FORMAT_VERSION:
            raise ModelFormatError(f"{path}: format version {version!r}, expected {FORMAT_VERSION!r}")
        try:
            params = ForestParams.model_validate(json.loads(str(archive["params"])))
            vocabulary = tuple(str(label) for label in archive["vocabulary"])
            seeds = tuple(int(s) for s in archive["seeds"])
            width = int(archive["width"])
            trees = [
                DecisionTree(**{name: archive[f"tree{t}_{name}"] for name in TREE_ARRAYS})
                for t in range(len(seeds))
            ]
        except (KeyError, ValueError, ValidationError) as e:
            raise ModelFormatError(f"{path}: malformed model archive: {e}") from e

    return RandomForest(trees=trees, vocabulary=vocabulary, params=params, seeds=seeds, width=width)
