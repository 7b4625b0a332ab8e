"""Parsing sensor logs and annotation tables."""

import json
import logging
from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path

import pandas as pd

from contextrec.core.errors import LogParseError
from contextrec.ingestion.catalog import SensorCatalog
from contextrec.ontology.model import RECOGNIZED_ASPECTS, Ontology

logger = logging.getLogger(__name__)

ANNOTATION_COLUMNS = ["user", "ts_ms", "we", "wa", "wo"]


@dataclass(frozen=True)
class SensorReading:
    """One sample; symbolic sensors carry a single string value."""

    user: str
    sensor: str
    ts_ms: int
    values: tuple[float, ...] | tuple[str, ...]


@dataclass(frozen=True)
class AnnotationEvent:
    """One questionnaire answer: where, doing what, with whom."""

    user: str
    ts_ms: int
    we: str
    wa: str
    wo: str

    @property
    def labels(self) -> dict[str, str]:
        return {"WE": self.we, "WA": self.wa, "WO": self.wo}


@dataclass
class ParsedLog:
    """Readings ordered by (user, timestamp) plus what was skipped."""

    readings: list[SensorReading]
    skipped: int = 0
    skipped_by_reason: Counter = field(default_factory=Counter)


def _parse_line(line: str, number: int) -> tuple[str, str, int, tuple]:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as e:
        raise LogParseError(f"malformed record ({e.msg})", number) from e
    if not isinstance(record, dict):
        raise LogParseError("malformed record (expected an object)", number)

    missing = [key for key in ("user", "sensor", "ts_ms", "values") if key not in record]
    if missing:
        raise LogParseError(f"malformed record (missing {', '.join(missing)})", number)

    user, sensor, ts_ms, values = record["user"], record["sensor"], record["ts_ms"], record["values"]
    if not isinstance(user, str) or not user:
        raise LogParseError("malformed record (user must be a nonempty string)", number)
    if not isinstance(sensor, str):
        raise LogParseError("malformed record (sensor must be a string)", number)
    if not isinstance(ts_ms, int) or isinstance(ts_ms, bool):
        raise LogParseError("malformed record (ts_ms must be an integer)", number)
    if not isinstance(values, list):
        raise LogParseError("malformed record (values must be a list)", number)
    return user, sensor, ts_ms, tuple(values)


def parse_sensor_log(lines: Iterable[str], catalog: SensorCatalog, strict: bool = False) -> ParsedLog:
    """
    Parse a JSON-lines sensor log.

    Each line is ``{"user": ..., "sensor": ..., "ts_ms": ..., "values": [...]}``.
    Blank lines are ignored.

    Args:
        lines: Log lines
        catalog: Sensors the log may contain
        strict: Abort on unknown sensors and arity/domain mismatches
            instead of skipping them

    Returns:
        ParsedLog with readings sorted by (user, timestamp)

    Raises:
        LogParseError: On malformed lines (always) or, in strict mode, on
            unknown sensors and arity/domain mismatches; carries the line number
    """
    readings = []
    skipped: Counter = Counter()
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        user, sensor, ts_ms, values = _parse_line(line, number)

        spec = catalog.get(sensor)
        if spec is None:
            if strict:
                raise LogParseError(f"unknown sensor id {sensor!r}", number)
            skipped["unknown sensor"] += 1
            continue

        problem = spec.check_values(values)
        if problem is not None:
            if strict:
                raise LogParseError(problem, number)
            skipped["arity/domain mismatch"] += 1
            continue

        if spec.kind != "symbolic":
            values = tuple(float(v) for v in values)
        readings.append(SensorReading(user, sensor, ts_ms, values))

    total_skipped = sum(skipped.values())
    if total_skipped:
        logger.warning("Skipped %d sensor log lines: %s", total_skipped, dict(skipped))

    readings.sort(key=lambda r: (r.user, r.ts_ms))
    return ParsedLog(readings=readings, skipped=total_skipped, skipped_by_reason=skipped)


def read_sensor_log(path: Path, catalog: SensorCatalog, strict: bool = False) -> ParsedLog:
    """
    Parse a sensor log file.

    Raises:
        LogParseError: If the file cannot be read or a line is malformed
    """
    try:
        with open(path) as f:
            return parse_sensor_log(f, catalog, strict=strict)
    except OSError as e:
        raise LogParseError(f"cannot read sensor log {path}: {e.strerror}") from e


def check_annotation_order(annotations: Iterable[AnnotationEvent]) -> None:
    """Raise LogParseError unless timestamps strictly increase per user."""
    last: dict[str, int] = {}
    for event in annotations:
        previous = last.get(event.user)
        if previous is not None and event.ts_ms <= previous:
            raise LogParseError(
                f"annotations for user {event.user} are not strictly increasing at ts_ms={event.ts_ms}"
            )
        last[event.user] = event.ts_ms


def read_annotations(path: Path, ontology: Ontology) -> list[AnnotationEvent]:
    """
    Load the annotation table ``user,ts_ms,we,wa,wo``.

    Rows are returned sorted by (user, ts_ms); every label must exist in the
    ontology at any depth.

    Raises:
        LogParseError: On missing columns, unknown labels (with line number)
            or repeated timestamps for a user
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (OSError, pd.errors.ParserError) as e:
        raise LogParseError(f"cannot read annotations {path}: {e}") from e

    missing = [column for column in ANNOTATION_COLUMNS if column not in frame.columns]
    if missing:
        raise LogParseError(f"annotation table lacks columns {missing}")

    events = []
    for row_number, row in enumerate(frame[ANNOTATION_COLUMNS].itertuples(index=False), start=2):
        try:
            ts_ms = int(row.ts_ms)
        except ValueError as e:
            raise LogParseError(f"ts_ms {row.ts_ms!r} is not an integer", row_number) from e
        event = AnnotationEvent(user=row.user, ts_ms=ts_ms, we=row.we, wa=row.wa, wo=row.wo)
        for aspect in RECOGNIZED_ASPECTS:
            label = event.labels[aspect.value]
            if not ontology.has_label(aspect, label):
                raise LogParseError(f"{aspect} label {label!r} is not in the ontology", row_number)
        events.append(event)

    events.sort(key=lambda e: (e.user, e.ts_ms))
    check_annotation_order(events)
    return events
