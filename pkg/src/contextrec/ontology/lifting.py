"""Rule-based lifting of machine-level values to subjective labels."""

import math
import numbers
from collections.abc import Iterable
from dataclasses import replace
from datetime import datetime, timedelta, timezone
from typing import Any

from shapely.geometry import Point

from contextrec.core.errors import InvalidCoordinateError, OntologyError
from contextrec.ontology.model import (
    Aspect,
    ContextTuple,
    GeoPoint,
    Ontology,
    TimeRule,
)


def validate_label(ontology: Ontology, aspect: Aspect, label: str) -> bool:
    """True iff ``label`` is in the vocabulary of ``aspect`` at any depth."""
    return ontology.has_label(aspect, label)


def subjective_time(hour_of_day: int, rules: Iterable[TimeRule]) -> str:
    """Label of the time rule containing ``hour_of_day``."""
    if not 0 <= hour_of_day <= 23:
        raise OntologyError(f"hour {hour_of_day} outside 0..23")
    for rule in rules:
        if rule.covers(hour_of_day):
            return rule.label
    raise OntologyError(f"no time rule covers hour {hour_of_day}")


def local_hour(epoch_ms: int, utc_offset_minutes: int = 0) -> int:
    """Civil hour of an epoch-milliseconds instant at a fixed UTC offset."""
    tz = timezone(timedelta(minutes=utc_offset_minutes))
    return datetime.fromtimestamp(epoch_ms / 1000, tz=tz).hour


def _as_point(value: Any) -> GeoPoint | None:
    if isinstance(value, GeoPoint):
        return value
    if isinstance(value, (tuple, list)) and len(value) == 2:
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            return GeoPoint(float(value[0]), float(value[1]))
    return None


def resolve_place(point: GeoPoint | tuple[float, float], ontology: Ontology) -> str | None:
    """
    Map a coordinate to the label of the geofence that contains it.

    Points on a fence boundary count as inside. When several fences contain
    the point the smallest one wins; equal areas fall back to declaration order.

    Raises:
        InvalidCoordinateError: If the point is not finite or out of range
    """
    lat, lon = point
    if not (math.isfinite(lat) and math.isfinite(lon)):
        raise InvalidCoordinateError(f"coordinate ({lat}, {lon}) is not finite")
    if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
        raise InvalidCoordinateError(f"coordinate ({lat}, {lon}) out of range")

    probe = Point(lon, lat)
    containing = [fence for fence in ontology.geofences if fence.shape.covers(probe)]
    if not containing:
        return None
    return min(containing, key=lambda fence: fence.area).label


def lift_context(machine: ContextTuple, ontology: Ontology, utc_offset_minutes: int = 0) -> ContextTuple:
    """
    Fill subjective TIME and WE levels from machine-level values.

    WA, WO and WI subjective levels are left as they are: they come from
    annotation or prediction, never from rules.

    Args:
        machine: Context whose ``time.machine`` holds epoch milliseconds
        ontology: Source of time rules and geofences
        utc_offset_minutes: Offset used to derive the local hour

    Returns:
        A new ContextTuple with the lifted subjective levels
    """
    epoch_ms = machine.time.machine
    if not isinstance(epoch_ms, numbers.Integral) or isinstance(epoch_ms, bool):
        raise OntologyError("time.machine must be epoch milliseconds")

    hour = local_hour(int(epoch_ms), utc_offset_minutes)
    lifted = machine.with_descriptor(
        Aspect.TIME,
        replace(machine.time, subjective=subjective_time(hour, ontology.time_rules)),
    )

    point = _as_point(machine.we.machine)
    if point is not None:
        lifted = lifted.with_descriptor(Aspect.WE, replace(machine.we, subjective=resolve_place(point, ontology)))
    return lifted


def validate_context(context: ContextTuple, ontology: Ontology) -> None:
    """Raise OntologyError if any subjective level is not in its vocabulary."""
    for aspect in Aspect:
        label = context.descriptor(aspect).subjective
        if label is not None and not ontology.has_label(aspect, label):
            raise OntologyError(f"{aspect} label {label!r} is not in the ontology")
