"""End-to-end ingestion: readings and annotations to a record dataset."""

import logging
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from contextrec.core.errors import FeatureError
from contextrec.ingestion.catalog import FeatureRecipe, SensorCatalog
from contextrec.ingestion.dataset import Dataset, Record
from contextrec.ingestion.features import extract_features
from contextrec.ingestion.parsing import AnnotationEvent, SensorReading
from contextrec.ingestion.windows import DEFAULT_WINDOW_MS, window_records
from contextrec.ontology.model import RECOGNIZED_ASPECTS, Aspect, Ontology

logger = logging.getLogger(__name__)


@dataclass
class IngestStats:
    """Counts reported by ``build_records``."""

    windows: int = 0
    truncated: int = 0
    dropped_readings: int = 0
    empty_windows: int = 0
    non_leaf_windows: int = 0


def build_records(
    readings: list[SensorReading],
    annotations: list[AnnotationEvent],
    catalog: SensorCatalog,
    recipe: FeatureRecipe,
    ontology: Ontology,
    window_ms: int = DEFAULT_WINDOW_MS,
    workers: int = 1,
) -> tuple[Dataset, IngestStats]:
    """
    Window, featurize and label every user's data.

    Users are processed independently (concurrently when ``workers > 1``);
    the output is ordered by user id then window start either way. Windows
    annotated with a group label rather than a leaf are left out, since
    classifiers train on leaf labels.

    Returns:
        The Dataset, with leaf vocabularies taken from ``ontology``, and stats
    """
    columns = recipe.columns(catalog)
    names = [column.name for column in columns]
    leaves = {aspect: set(ontology.leaf_labels(aspect)) for aspect in RECOGNIZED_ASPECTS}

    readings_by_user: dict[str, list[SensorReading]] = defaultdict(list)
    for reading in readings:
        readings_by_user[reading.user].append(reading)
    events_by_user: dict[str, list[AnnotationEvent]] = defaultdict(list)
    for event in annotations:
        events_by_user[event.user].append(event)

    def process(user: str) -> tuple[list[Record], IngestStats]:
        windowing = window_records(readings_by_user.get(user, []), events_by_user[user], window_ms)
        stats = IngestStats(truncated=windowing.truncated, dropped_readings=windowing.dropped)
        records = []
        for window in windowing.windows:
            labels = {Aspect(k): v for k, v in window.annotation.labels.items()}
            if any(labels[aspect] not in leaves[aspect] for aspect in RECOGNIZED_ASPECTS):
                stats.non_leaf_windows += 1
                continue
            vector = extract_features(window, catalog, recipe, columns=columns)
            if vector.mask.all():
                stats.empty_windows += 1
            records.append(Record(user, window.start, vector.values, vector.mask, labels))
        stats.windows = len(records)
        return records, stats

    users = sorted(events_by_user)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(process, users))

    records: list[Record] = []
    total = IngestStats()
    for user_records, stats in results:
        records.extend(user_records)
        total.windows += stats.windows
        total.truncated += stats.truncated
        total.dropped_readings += stats.dropped_readings
        total.empty_windows += stats.empty_windows
        total.non_leaf_windows += stats.non_leaf_windows

    # readings of users who never answered the questionnaire are unclaimed too
    total.dropped_readings += sum(len(v) for u, v in readings_by_user.items() if u not in events_by_user)

    if not records:
        raise FeatureError("no annotated windows to build records from")
    if total.empty_windows:
        logger.warning("%d windows had no readings at all; their features are fully masked", total.empty_windows)
    if total.non_leaf_windows:
        logger.warning("Left out %d windows annotated with group labels", total.non_leaf_windows)

    vocabularies = {aspect: ontology.leaf_labels(aspect) for aspect in RECOGNIZED_ASPECTS}
    dataset = Dataset.from_records(records, names, vocabularies)
    logger.info("Built %d records of width %d", len(dataset), dataset.width)
    return dataset, total
