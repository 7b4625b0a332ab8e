"""Assigning sensor readings to annotation windows."""

import bisect
import logging
from collections import defaultdict
from collections.abc import Iterable
from dataclasses import dataclass, field

from contextrec.core.errors import WindowingError
from contextrec.ingestion.parsing import AnnotationEvent, SensorReading

logger = logging.getLogger(__name__)

DEFAULT_WINDOW_MS = 30 * 60 * 1000


@dataclass(frozen=True)
class Window:
    """The readings one annotation claims: ``[start, end)`` for one user."""

    user: str
    start: int
    end: int
    annotation: AnnotationEvent
    readings: tuple[SensorReading, ...] = ()


@dataclass
class Windowing:
    """Windows in (user, start) order plus bookkeeping counts."""

    windows: list[Window] = field(default_factory=list)
    truncated: int = 0
    dropped: int = 0


def window_records(
    readings: Iterable[SensorReading],
    annotations: Iterable[AnnotationEvent],
    window_ms: int = DEFAULT_WINDOW_MS,
) -> Windowing:
    """
    Let each annotation at ``t`` claim its user's readings in ``[t, t + window_ms)``.

    A later annotation inside that interval truncates the earlier window at its
    own timestamp. Readings no window claims are dropped; windows without
    readings are kept.

    Raises:
        WindowingError: If ``window_ms`` is not positive or a user's
            annotations are not strictly increasing
    """
    if window_ms <= 0:
        raise WindowingError(f"window length must be positive, got {window_ms}")

    by_user: dict[str, list[SensorReading]] = defaultdict(list)
    for reading in readings:
        by_user[reading.user].append(reading)
    events: dict[str, list[AnnotationEvent]] = defaultdict(list)
    for event in annotations:
        previous = events[event.user][-1] if events[event.user] else None
        if previous is not None and event.ts_ms <= previous.ts_ms:
            raise WindowingError(f"annotations for user {event.user} are not sorted at ts_ms={event.ts_ms}")
        events[event.user].append(event)

    result = Windowing()
    claimed = 0
    for user in sorted(set(by_user) | set(events)):
        user_readings = sorted(by_user.get(user, []), key=lambda r: r.ts_ms)
        stamps = [r.ts_ms for r in user_readings]
        user_events = events.get(user, [])
        for i, event in enumerate(user_events):
            end = event.ts_ms + window_ms
            if i + 1 < len(user_events) and user_events[i + 1].ts_ms < end:
                end = user_events[i + 1].ts_ms
                result.truncated += 1
            lo = bisect.bisect_left(stamps, event.ts_ms)
            hi = bisect.bisect_left(stamps, end)
            claimed += hi - lo
            result.windows.append(Window(user, event.ts_ms, end, event, tuple(user_readings[lo:hi])))
        result.dropped += len(user_readings)

    result.dropped -= claimed
    if result.truncated:
        logger.warning("Truncated %d overlapping annotation windows", result.truncated)
    logger.info("Built %d windows; %d readings unclaimed", len(result.windows), result.dropped)
    return result
