"""Synthetic record datasets with tunable correlation between aspects."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator

from contextrec.core.errors import GeneratorParamsError
from contextrec.core.manifest import RunManifest, write_manifest
from contextrec.ingestion.dataset import Dataset, write_records
from contextrec.ontology.loader import describe_validation_error
from contextrec.ontology.model import Aspect

logger = logging.getLogger(__name__)

# 2020-02-17T00:00:00Z; synthetic windows are laid out every 30 minutes from here
EPOCH_START_MS = 1581897600000
WINDOW_MS = 30 * 60 * 1000


class GeneratorParams(BaseModel):
    """Knobs of the synthetic generator."""

    users: int = Field(default=20, ge=1)
    records_per_user: int = Field(default=250, ge=1)
    we_size: int = Field(default=8, ge=2)
    wa_size: int = Field(default=10, ge=2)
    wo_size: int = Field(default=5, ge=2)
    rho: float = 0.8
    width: int = Field(default=30, ge=3)
    prototype_scale: float = Field(default=1.0, gt=0.0)
    noise_scale: float = Field(default=1.5, ge=0.0)
    seed: int = Field(default=7, ge=0)

    @field_validator("rho")
    @classmethod
    def _check_rho(cls, rho: float) -> float:
        if not 0.0 <= rho <= 1.0:
            raise ValueError("rho out of [0,1]")
        return rho


def make_params(**values: Any) -> GeneratorParams:
    """Build GeneratorParams, raising GeneratorParamsError on invalid values."""
    try:
        return GeneratorParams(**values)
    except ValidationError as e:
        raise GeneratorParamsError(describe_validation_error(e)) from e


@dataclass(frozen=True)
class Structure:
    """Coupling maps and per-aspect prototypes drawn once per seed."""

    wa_of_we: np.ndarray
    wo_of_we_wa: np.ndarray
    prototypes: dict[Aspect, np.ndarray]
    blocks: dict[Aspect, np.ndarray]


def vocabulary(aspect: Aspect, size: int) -> tuple[str, ...]:
    prefix = aspect.value.lower()
    return tuple(f"{prefix}_{i:02d}" for i in range(size))


def draw_structure(params: GeneratorParams, rng: np.random.Generator) -> Structure:
    """
    Draw the deterministic coupling maps and the feature prototypes.

    Each aspect owns a contiguous block of the feature columns, so a record's
    prototype is the concatenation of its WE, WA and WO block prototypes.
    """
    wa_of_we = rng.permutation(params.wa_size)[np.arange(params.we_size) % params.wa_size]
    shift_we = rng.permutation(params.we_size)
    shift_wa = rng.permutation(params.wa_size)
    wo_of_we_wa = (shift_we[:, None] + shift_wa[None, :]) % params.wo_size

    columns = np.array_split(np.arange(params.width), 3)
    blocks = dict(zip((Aspect.WE, Aspect.WA, Aspect.WO), columns))
    sizes = {Aspect.WE: params.we_size, Aspect.WA: params.wa_size, Aspect.WO: params.wo_size}
    prototypes = {
        aspect: rng.normal(0.0, params.prototype_scale, size=(sizes[aspect], len(blocks[aspect])))
        for aspect in blocks
    }
    return Structure(wa_of_we=wa_of_we, wo_of_we_wa=wo_of_we_wa, prototypes=prototypes, blocks=blocks)


def prototype_matrix(structure: Structure, we: np.ndarray, wa: np.ndarray, wo: np.ndarray) -> np.ndarray:
    """Noise-free features for label index arrays."""
    parts = [structure.prototypes[Aspect.WE][we], structure.prototypes[Aspect.WA][wa], structure.prototypes[Aspect.WO][wo]]
    return np.hstack(parts)


def _sample_user(params: GeneratorParams, structure: Structure, seq: np.random.SeedSequence):
    rng = np.random.default_rng(seq)
    m = params.records_per_user
    we = rng.integers(params.we_size, size=m)
    coupled_wa = rng.random(m) < params.rho
    wa = np.where(coupled_wa, structure.wa_of_we[we], rng.integers(params.wa_size, size=m))
    coupled_wo = rng.random(m) < params.rho
    wo = np.where(coupled_wo, structure.wo_of_we_wa[we, wa], rng.integers(params.wo_size, size=m))
    features = prototype_matrix(structure, we, wa, wo) + rng.normal(0.0, params.noise_scale, size=(m, params.width))
    return we, wa, wo, features


def sample_dataset(params: GeneratorParams, workers: int = 1) -> Dataset:
    """
    Sample a dataset from ``params``.

    WE is uniform; WA follows the WE map with probability ``rho`` and is
    uniform otherwise; WO follows the (WE, WA) map with probability ``rho``.
    Features are the label prototype plus Gaussian noise. Users draw from
    independent substreams of the master seed, so the result does not depend
    on ``workers``.
    """
    root = np.random.SeedSequence(params.seed)
    structure_seq, *user_seqs = root.spawn(1 + params.users)
    structure = draw_structure(params, np.random.default_rng(structure_seq))

    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda seq: _sample_user(params, structure, seq), user_seqs))

    we = np.concatenate([p[0] for p in parts])
    wa = np.concatenate([p[1] for p in parts])
    wo = np.concatenate([p[2] for p in parts])
    features = np.vstack([p[3] for p in parts])

    m = params.records_per_user
    vocabularies = {
        Aspect.WE: vocabulary(Aspect.WE, params.we_size),
        Aspect.WA: vocabulary(Aspect.WA, params.wa_size),
        Aspect.WO: vocabulary(Aspect.WO, params.wo_size),
    }
    labels = {
        aspect: np.array(vocabularies[aspect], dtype=object)[index]
        for aspect, index in ((Aspect.WE, we), (Aspect.WA, wa), (Aspect.WO, wo))
    }
    users = np.repeat(np.array([f"u{i:03d}" for i in range(params.users)], dtype=object), m)
    starts = np.tile(EPOCH_START_MS + WINDOW_MS * np.arange(m, dtype=np.int64), params.users)

    dataset = Dataset(
        users=users,
        starts=starts,
        features=features,
        mask=np.zeros(features.shape, dtype=bool),
        labels=labels,
        feature_names=[f"sensor_{j:03d}" for j in range(params.width)],
        vocabularies=vocabularies,
    )
    logger.info("Sampled %d synthetic records (rho=%.2f, seed=%d)", len(dataset), params.rho, params.seed)
    return dataset


def write_dataset(
    dataset: Dataset,
    params: GeneratorParams,
    path: Path,
    config: dict[str, Any] | None = None,
) -> Path:
    """Write the record table and its sidecar manifest; returns the manifest path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_records(dataset, path)
    manifest = RunManifest(
        command="generate",
        seed=params.seed,
        config=config or {"params": params.model_dump()},
        outputs=[path.name],
        extra={
            "params": params.model_dump(),
            "digest": dataset.digest(),
            "vocabularies": {aspect.value: list(labels) for aspect, labels in dataset.vocabularies.items()},
        },
    )
    return write_manifest(path, manifest)
