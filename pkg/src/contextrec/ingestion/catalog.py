"""Sensor catalog and feature recipe documents."""

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from contextrec.core.errors import FeatureError, LogParseError
from contextrec.ontology.loader import describe_validation_error

Aggregate = Literal["mean", "std", "min", "max", "mode_frequency", "count"]

# Aggregates computed per value axis; the rest are one column per channel.
AXIS_AGGREGATES = ("mean", "std", "min", "max")


class Cadence(BaseModel):
    """How often a sensor reports."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["rate", "on_change", "interval"]
    hz: float | None = None
    seconds: float | None = None

    @model_validator(mode="after")
    def _check_kind(self) -> "Cadence":
        if self.kind == "rate" and (self.hz is None or self.hz <= 0):
            raise ValueError("fixed-rate cadence needs hz > 0")
        if self.kind == "interval" and (self.seconds is None or self.seconds <= 0):
            raise ValueError("interval cadence needs seconds > 0")
        return self


class SensorSpec(BaseModel):
    """One sensor channel: value arity, unit and cadence."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    id: str = Field(..., min_length=1)
    arity: int = Field(..., ge=1)
    unit: str
    cadence: Cadence
    kind: Literal["numeric", "binary", "symbolic"] = "numeric"
    axes: tuple[str, ...] = ()

    @model_validator(mode="after")
    def _check_axes(self) -> "SensorSpec":
        if self.axes and len(self.axes) != self.arity:
            raise ValueError(f"sensor {self.id}: {len(self.axes)} axes for arity {self.arity}")
        if self.kind == "symbolic" and self.arity != 1:
            raise ValueError(f"sensor {self.id}: symbolic sensors have arity 1")
        return self

    @property
    def axis_names(self) -> tuple[str, ...]:
        if self.axes:
            return self.axes
        if self.arity == 1:
            return ("",)
        return tuple(str(i) for i in range(self.arity))

    def check_values(self, values: tuple) -> str | None:
        """Why ``values`` do not fit this sensor, or None if they do."""
        if len(values) != self.arity:
            return f"arity/domain mismatch: {self.id} expects {self.arity} values, got {len(values)}"
        if self.kind == "symbolic":
            if not all(isinstance(v, str) for v in values):
                return f"arity/domain mismatch: {self.id} expects a symbolic value"
            return None
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
            return f"arity/domain mismatch: {self.id} expects numeric values"
        if self.kind == "binary" and any(v not in (0, 1) for v in values):
            return f"arity/domain mismatch: {self.id} values must be 0/1, got {list(values)}"
        return None


class SensorCatalog(BaseModel):
    """The set of sensors a log may contain."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    sensors: tuple[SensorSpec, ...]

    @model_validator(mode="after")
    def _check_unique(self) -> "SensorCatalog":
        seen = set()
        for spec in self.sensors:
            if spec.id in seen:
                raise ValueError(f"duplicate sensor id {spec.id!r}")
            seen.add(spec.id)
        return self

    def get(self, sensor_id: str) -> SensorSpec | None:
        for spec in self.sensors:
            if spec.id == sensor_id:
                return spec
        return None

    def __contains__(self, sensor_id: str) -> bool:
        return self.get(sensor_id) is not None


class ChannelRecipe(BaseModel):
    """Aggregates to emit for one sensor channel."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    sensor: str
    aggregates: tuple[Aggregate, ...] = Field(..., min_length=1)


@dataclass(frozen=True)
class FeatureColumn:
    """Where one feature column comes from."""

    name: str
    sensor: str
    aggregate: str
    axis: int | None


class FeatureRecipe(BaseModel):
    """Declarative recipe turning a window of readings into a feature vector."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    width: int = Field(..., ge=1)
    channels: tuple[ChannelRecipe, ...]

    def columns(self, catalog: SensorCatalog) -> list[FeatureColumn]:
        """
        Resolve the column layout against ``catalog``.

        Raises:
            FeatureError: On unknown sensors, aggregates that do not apply to
                the sensor kind, or a layout that disagrees with ``width``
        """
        columns = []
        for channel in self.channels:
            spec = catalog.get(channel.sensor)
            if spec is None:
                raise FeatureError(f"recipe names unknown sensor {channel.sensor!r}")
            for aggregate in channel.aggregates:
                if spec.kind == "symbolic" and aggregate in AXIS_AGGREGATES:
                    raise FeatureError(f"aggregate {aggregate} does not apply to symbolic sensor {spec.id}")
                if spec.kind != "symbolic" and aggregate == "mode_frequency":
                    raise FeatureError(f"mode_frequency applies to symbolic sensors only, not {spec.id}")
                if aggregate in AXIS_AGGREGATES:
                    for axis, axis_name in enumerate(spec.axis_names):
                        stem = f"{spec.id}_{axis_name}" if axis_name else spec.id
                        columns.append(FeatureColumn(f"{stem}_{aggregate}", spec.id, aggregate, axis))
                else:
                    columns.append(FeatureColumn(f"{spec.id}_{aggregate}", spec.id, aggregate, None))

        if len(columns) != self.width:
            raise FeatureError(f"recipe declares width {self.width} but yields {len(columns)} columns")
        return columns


def _read_text(path: Path, what: str, error: type[Exception]) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise error(f"cannot read {what} {path}: {e.strerror}") from e


def _load_document(text: str, model: type[BaseModel], what: str, error: type[Exception]) -> BaseModel:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise error(f"malformed {what}: {e}") from e
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise error(f"{what}: {describe_validation_error(e)}") from e


def load_catalog(path: Path | None = None) -> SensorCatalog:
    """Load a sensor catalog; ``None`` selects the packaged phone catalog."""
    if path is None:
        text = resources.files("contextrec.data").joinpath("sensors.yaml").read_text()
    else:
        text = _read_text(path, "sensor catalog", LogParseError)
    return _load_document(text, SensorCatalog, "sensor catalog", LogParseError)


def load_recipe(path: Path | None = None) -> FeatureRecipe:
    """Load a feature recipe; ``None`` selects the packaged 122-column recipe."""
    if path is None:
        text = resources.files("contextrec.data").joinpath("recipe.yaml").read_text()
    else:
        text = _read_text(path, "feature recipe", FeatureError)
    return _load_document(text, FeatureRecipe, "feature recipe", FeatureError)
