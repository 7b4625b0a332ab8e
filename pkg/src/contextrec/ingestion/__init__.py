"""Sensor log ingestion: parsing, windowing, feature extraction and imputation."""

from contextrec.ingestion.catalog import (
    FeatureColumn,
    FeatureRecipe,
    SensorCatalog,
    SensorSpec,
    load_catalog,
    load_recipe,
)
from contextrec.ingestion.dataset import Dataset, Record, read_records, write_records
from contextrec.ingestion.features import FeatureVector, extract_features
from contextrec.ingestion.impute import ImputePolicy, MedianImputer, impute
from contextrec.ingestion.parsing import (
    AnnotationEvent,
    ParsedLog,
    SensorReading,
    parse_sensor_log,
    read_annotations,
    read_sensor_log,
)
from contextrec.ingestion.pipeline import IngestStats, build_records
from contextrec.ingestion.windows import DEFAULT_WINDOW_MS, Window, Windowing, window_records

__all__ = [
    "DEFAULT_WINDOW_MS",
    "AnnotationEvent",
    "Dataset",
    "FeatureColumn",
    "FeatureRecipe",
    "FeatureVector",
    "ImputePolicy",
    "IngestStats",
    "MedianImputer",
    "ParsedLog",
    "Record",
    "SensorCatalog",
    "SensorReading",
    "SensorSpec",
    "Window",
    "Windowing",
    "build_records",
    "extract_features",
    "impute",
    "load_catalog",
    "load_recipe",
    "parse_sensor_log",
    "read_annotations",
    "read_records",
    "read_sensor_log",
    "window_records",
    "write_records",
]
