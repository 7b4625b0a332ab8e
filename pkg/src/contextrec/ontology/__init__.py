"""Five-aspect context model: ontology, context tuples and lifting rules."""

from contextrec.ontology.lifting import (
    lift_context,
    local_hour,
    resolve_place,
    subjective_time,
    validate_context,
    validate_label,
)
from contextrec.ontology.loader import (
    default_ontology,
    load_ontology,
    load_ontology_file,
    serialize_ontology,
)
from contextrec.ontology.model import (
    DEFAULT_TIME_RULES,
    RECOGNIZED_ASPECTS,
    Aspect,
    AspectDescriptor,
    ContextTuple,
    GeoPoint,
    Geofence,
    Label,
    Ontology,
    TimeRule,
)

__all__ = [
    "DEFAULT_TIME_RULES",
    "RECOGNIZED_ASPECTS",
    "Aspect",
    "AspectDescriptor",
    "ContextTuple",
    "GeoPoint",
    "Geofence",
    "Label",
    "Ontology",
    "TimeRule",
    "default_ontology",
    "lift_context",
    "load_ontology",
    "load_ontology_file",
    "local_hour",
    "resolve_place",
    "serialize_ontology",
    "subjective_time",
    "validate_context",
    "validate_label",
]
