"""Context model types: aspects, the ontology schema and context tuples."""

from collections import Counter
from dataclasses import dataclass, field, replace
from enum import StrEnum
from functools import cached_property
from typing import Any, NamedTuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from shapely.geometry import Polygon

from contextrec.core.errors import OntologyError


class Aspect(StrEnum):
    """The five dimensions of a context tuple."""

    TIME = "TIME"
    WE = "WE"  # endurant: where
    WA = "WA"  # perdurant: what
    WO = "WO"  # social: who with
    WI = "WI"  # object: what with


# Aspects that are annotated and recognized, in one-hot block order.
RECOGNIZED_ASPECTS: tuple[Aspect, ...] = (Aspect.WE, Aspect.WA, Aspect.WO)


class GeoPoint(NamedTuple):
    """A WGS84 coordinate in decimal degrees."""

    lat: float
    lon: float


class Label(BaseModel):
    """One entry of an aspect vocabulary."""

    model_config = ConfigDict(frozen=True)

    id: str = Field(..., min_length=1)
    name: str | None = None
    parent: str | None = None

    @property
    def display_name(self) -> str:
        return self.name or self.id


class TimeRule(BaseModel):
    """Maps the local hours ``[start, end)`` to a subjective time label."""

    model_config = ConfigDict(frozen=True)

    start: int = Field(..., ge=0, le=23)
    end: int = Field(..., ge=1, le=24)
    label: str = Field(..., min_length=1)

    @model_validator(mode="after")
    def _check_order(self) -> "TimeRule":
        if self.start >= self.end:
            raise ValueError(f"time rule {self.label!r} has start {self.start} >= end {self.end}")
        return self

    def covers(self, hour: int) -> bool:
        return self.start <= hour < self.end


DEFAULT_TIME_RULES: tuple[TimeRule, ...] = (
    TimeRule(start=0, end=6, label="night"),
    TimeRule(start=6, end=12, label="morning"),
    TimeRule(start=12, end=18, label="afternoon"),
    TimeRule(start=18, end=22, label="evening"),
    TimeRule(start=22, end=24, label="night"),
)


class Geofence(BaseModel):
    """A named polygon; vertices are ``(lat, lon)`` pairs."""

    model_config = ConfigDict(frozen=True)

    label: str = Field(..., min_length=1)
    polygon: tuple[tuple[float, float], ...]

    @field_validator("polygon")
    @classmethod
    def _check_polygon(cls, polygon: tuple[tuple[float, float], ...]) -> tuple[tuple[float, float], ...]:
        vertices = polygon[:-1] if len(polygon) > 1 and polygon[0] == polygon[-1] else polygon
        if len(vertices) < 3:
            raise ValueError(f"polygon needs at least 3 vertices, got {len(vertices)}")
        for lat, lon in vertices:
            if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
                raise ValueError(f"vertex ({lat}, {lon}) out of range")
        shape = Polygon([(lon, lat) for lat, lon in vertices])
        if shape.area <= 0.0:
            raise ValueError("polygon has zero area")
        if not shape.is_valid:
            raise ValueError("polygon is self-intersecting")
        return polygon

    @cached_property
    def shape(self) -> Polygon:
        # shapely works in (x, y) = (lon, lat)
        return Polygon([(lon, lat) for lat, lon in self.polygon])

    @property
    def area(self) -> float:
        return self.shape.area


def _item_field(item: Any, name: str) -> Any:
    return item.get(name) if isinstance(item, dict) else getattr(item, name, None)


def _unique(values: list[str]) -> list[str]:
    return list(dict.fromkeys(values))


class Ontology(BaseModel):
    """Label vocabularies per aspect plus the machine-to-subjective lifting rules.

    Immutable after construction; every invariant is checked on load.
    """

    model_config = ConfigDict(frozen=True)

    version: str = Field(..., min_length=1)
    aspects: dict[Aspect, tuple[Label, ...]] = Field(default_factory=dict)
    time_rules: tuple[TimeRule, ...] = DEFAULT_TIME_RULES
    geofences: tuple[Geofence, ...] = ()

    @model_validator(mode="before")
    @classmethod
    def _complete_vocabularies(cls, data: Any) -> Any:
        """Derive TIME/WE vocabularies from rules and fences when undeclared."""
        if not isinstance(data, dict):
            return data
        data = dict(data)
        aspects = dict(data.get("aspects") or {})
        rules = data.get("time_rules")
        if rules is None:
            rules = DEFAULT_TIME_RULES
        if Aspect.TIME not in aspects:
            labels = _unique([_item_field(r, "label") for r in rules])
            aspects[Aspect.TIME.value] = [{"id": label} for label in labels if label]
        fences = data.get("geofences") or ()
        if Aspect.WE not in aspects and fences:
            labels = _unique([_item_field(f, "label") for f in fences])
            aspects[Aspect.WE.value] = [{"id": label} for label in labels if label]
        data["aspects"] = aspects
        return data

    @model_validator(mode="after")
    def _check_invariants(self) -> "Ontology":
        for aspect, labels in self.aspects.items():
            counts = Counter(label.id for label in labels)
            duplicates = sorted(label for label, n in counts.items() if n > 1)
            if duplicates:
                raise ValueError(f"duplicate {aspect} label id {duplicates[0]!r}")
            parents = {label.id: label.parent for label in labels}
            for label in labels:
                if label.parent is not None and label.parent not in parents:
                    raise ValueError(f"{aspect} label {label.id!r} has unknown parent {label.parent!r}")
            for start in parents:
                seen = {start}
                node = parents[start]
                while node is not None:
                    if node in seen:
                        raise ValueError(f"{aspect} label {start!r} is part of a parent cycle")
                    seen.add(node)
                    node = parents[node]

        coverage = [0] * 24
        for rule in self.time_rules:
            for hour in range(rule.start, rule.end):
                coverage[hour] += 1
        uncovered = [h for h, n in enumerate(coverage) if n == 0]
        overlapping = [h for h, n in enumerate(coverage) if n > 1]
        if uncovered or overlapping:
            detail = []
            if uncovered:
                detail.append(f"uncovered hours {uncovered}")
            if overlapping:
                detail.append(f"overlapping hours {overlapping}")
            raise ValueError(f"time rules do not partition [0,24): {'; '.join(detail)}")

        for rule in self.time_rules:
            if not self.has_label(Aspect.TIME, rule.label):
                raise ValueError(f"time rule label {rule.label!r} missing from TIME vocabulary")
        for fence in self.geofences:
            if not self.has_label(Aspect.WE, fence.label):
                raise ValueError(f"geofence label {fence.label!r} missing from WE vocabulary")
        return self

    @cached_property
    def label_index(self) -> dict[Aspect, dict[str, Label]]:
        return {aspect: {label.id: label for label in labels} for aspect, labels in self.aspects.items()}

    def vocabulary(self, aspect: Aspect) -> tuple[str, ...]:
        """All label ids of ``aspect`` in declaration order."""
        return tuple(label.id for label in self.aspects.get(aspect, ()))

    def leaf_labels(self, aspect: Aspect) -> tuple[str, ...]:
        """Label ids that no other label names as parent."""
        labels = self.aspects.get(aspect, ())
        parents = {label.parent for label in labels if label.parent is not None}
        return tuple(label.id for label in labels if label.id not in parents)

    def has_label(self, aspect: Aspect, label: str) -> bool:
        return label in self.label_index.get(aspect, {})

    def ancestors(self, aspect: Aspect, label: str) -> tuple[str, ...]:
        """Parent chain of ``label``, nearest first."""
        index = self.label_index.get(aspect, {})
        chain = []
        node = index[label].parent if label in index else None
        while node is not None:
            chain.append(node)
            node = index[node].parent
        return tuple(chain)

    def label_count(self) -> int:
        return sum(len(labels) for labels in self.aspects.values())


@dataclass(frozen=True)
class AspectDescriptor:
    """One aspect seen at the objective, machine and subjective levels."""

    objective: Any = None
    machine: Any = None
    subjective: str | None = None


@dataclass(frozen=True)
class ContextTuple:
    """An individual's context at an instant: one descriptor per aspect."""

    owner: str
    at: int | None = None
    time: AspectDescriptor = field(default_factory=AspectDescriptor)
    we: AspectDescriptor = field(default_factory=AspectDescriptor)
    wa: AspectDescriptor = field(default_factory=AspectDescriptor)
    wo: AspectDescriptor = field(default_factory=AspectDescriptor)
    wi: AspectDescriptor = field(default_factory=AspectDescriptor)

    def __post_init__(self) -> None:
        if self.at is not None and self.time.machine is not None and self.at != self.time.machine:
            raise OntologyError(f"context time {self.at} disagrees with time.machine {self.time.machine}")

    def descriptor(self, aspect: Aspect) -> AspectDescriptor:
        return getattr(self, aspect.value.lower())

    def with_descriptor(self, aspect: Aspect, descriptor: AspectDescriptor) -> "ContextTuple":
        return replace(self, **{aspect.value.lower(): descriptor})
