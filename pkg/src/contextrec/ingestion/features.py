"""Per-window feature extraction driven by a feature recipe."""

from collections import Counter, defaultdict
from dataclasses import dataclass

import numpy as np

from contextrec.core.errors import FeatureError
from contextrec.ingestion.catalog import FeatureColumn, FeatureRecipe, SensorCatalog
from contextrec.ingestion.parsing import SensorReading
from contextrec.ingestion.windows import Window


@dataclass(frozen=True)
class FeatureVector:
    """Feature values and the mask of entries that had no data (NaN in ``values``)."""

    values: np.ndarray
    mask: np.ndarray


def _numeric_aggregate(samples: np.ndarray, aggregate: str, axis: int | None) -> float:
    if aggregate == "count":
        return float(samples.shape[0])
    # sorted so the result does not depend on reading order
    column = np.sort(samples[:, axis])
    if aggregate == "mean":
        return float(column.mean())
    if aggregate == "std":
        return float(column.std())
    if aggregate == "min":
        return float(column[0])
    if aggregate == "max":
        return float(column[-1])
    raise FeatureError(f"aggregate {aggregate} does not apply to numeric readings")


def _symbolic_aggregate(samples: list[str], aggregate: str) -> float:
    if aggregate == "count":
        return float(len(samples))
    if aggregate == "mode_frequency":
        return Counter(samples).most_common(1)[0][1] / len(samples)
    raise FeatureError(f"aggregate {aggregate} does not apply to symbolic readings")


def extract_features(
    window: Window | list[SensorReading],
    catalog: SensorCatalog,
    recipe: FeatureRecipe,
    expected_width: int | None = None,
    columns: list[FeatureColumn] | None = None,
) -> FeatureVector:
    """
    Aggregate a window's readings into the recipe's fixed-width vector.

    Channels without readings produce masked entries.

    Args:
        window: A Window or a plain list of readings
        catalog: Sensor catalog the recipe refers to
        recipe: Aggregates to compute per channel
        expected_width: Dataset width the vector must match
        columns: Pre-resolved ``recipe.columns(catalog)``

    Raises:
        FeatureError: If the recipe width differs from ``expected_width``
    """
    if columns is None:
        columns = recipe.columns(catalog)
    if expected_width is not None and len(columns) != expected_width:
        raise FeatureError(f"recipe width {len(columns)} does not match dataset width {expected_width}")

    readings = window.readings if isinstance(window, Window) else window
    by_sensor: dict[str, list[SensorReading]] = defaultdict(list)
    for reading in readings:
        by_sensor[reading.sensor].append(reading)

    stacked: dict[str, np.ndarray | list[str]] = {}
    for sensor, sensor_readings in by_sensor.items():
        spec = catalog.get(sensor)
        if spec is None:
            continue
        if spec.kind == "symbolic":
            stacked[sensor] = [r.values[0] for r in sensor_readings]
        else:
            stacked[sensor] = np.asarray([r.values for r in sensor_readings], dtype=np.float64)

    values = np.full(len(columns), np.nan)
    mask = np.ones(len(columns), dtype=bool)
    for i, column in enumerate(columns):
        samples = stacked.get(column.sensor)
        if samples is None:
            continue
        if isinstance(samples, list):
            values[i] = _symbolic_aggregate(samples, column.aggregate)
        else:
            values[i] = _numeric_aggregate(samples, column.aggregate, column.axis)
        mask[i] = False
    return FeatureVector(values=values, mask=mask)
