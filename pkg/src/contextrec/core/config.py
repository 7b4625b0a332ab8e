"""Configuration management for contextrec."""

import os
from functools import lru_cache
from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class PathsConfig(BaseModel):
    """Locations of the model documents. ``None`` selects the packaged default."""

    ontology: Path | None = None
    catalog: Path | None = None
    recipe: Path | None = None


class IngestionConfig(BaseModel):
    """Sensor log ingestion configuration."""

    window_minutes: int = Field(default=30, ge=1)
    strict: bool = False
    workers: int = Field(default=1, ge=1)


class SynthConfig(BaseModel):
    """Synthetic generator defaults."""

    users: int = 20
    records_per_user: int = 250
    we_size: int = 8
    wa_size: int = 10
    wo_size: int = 5
    rho: float = 0.8
    width: int = 30
    prototype_scale: float = 1.0
    noise_scale: float = 1.5


class ForestConfig(BaseModel):
    """Random forest defaults."""

    trees: int = Field(default=100, ge=1)
    max_features: int | None = None
    bootstrap: bool = True
    sample_fraction: float = Field(default=1.0, gt=0.0, le=1.0)
    min_samples_split: int = Field(default=2, ge=2)


class ExperimentConfig(BaseModel):
    """Cross-validation harness defaults."""

    folds: int = Field(default=5, ge=2)
    protocol: Literal["cv5", "nested"] = "cv5"
    # ``null`` in YAML means unlimited depth
    depth_grid: list[int | None] = [2, 4, 6, 8, 12, 16, 24, None]
    workers: int = Field(default=1, ge=1)


class Settings(BaseSettings):
    """Application settings loaded from YAML config and environment variables."""

    model_config = SettingsConfigDict(env_prefix="CONTEXTREC_", env_nested_delimiter="__")

    seed: int = Field(default=7, ge=0)
    paths: PathsConfig = PathsConfig()
    ingestion: IngestionConfig = IngestionConfig()
    synth: SynthConfig = SynthConfig()
    forest: ForestConfig = ForestConfig()
    experiment: ExperimentConfig = ExperimentConfig()


def find_config_file() -> Path | None:
    """Find the config file in common locations."""
    search_paths = [
        Path("config/config.yaml"),
        Path("config.yaml"),
        Path.home() / ".contextrec" / "config.yaml",
    ]

    for path in search_paths:
        if path.exists():
            return path

    return None


def load_config_from_yaml(config_path: Path | None = None) -> dict:
    """Load configuration from YAML file."""
    if config_path is None:
        config_path = find_config_file()

    if config_path is None or not config_path.exists():
        return {}

    with open(config_path) as f:
        return yaml.safe_load(f) or {}


@lru_cache
def get_settings() -> Settings:
    """Get cached application settings."""
    config_path_env = os.environ.get("CONTEXTREC_CONFIG_PATH")
    config_path = Path(config_path_env) if config_path_env else None

    yaml_config = load_config_from_yaml(config_path)
    return Settings(**yaml_config)
