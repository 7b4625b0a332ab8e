"""Reading and writing ontology documents (YAML)."""

import logging
from importlib import resources
from pathlib import Path
from typing import Any

import yaml
from pydantic import ValidationError

from contextrec.core.errors import OntologyError
from contextrec.ontology.model import Aspect, Ontology

logger = logging.getLogger(__name__)

TOP_LEVEL_KEYS = {"version", "aspects", "time_rules", "geofences"}
LABEL_KEYS = {"id", "name", "parent"}
RULE_KEYS = {"start", "end", "label"}
FENCE_KEYS = {"label", "polygon"}


def _unknown_keys(document: dict[str, Any]) -> list[str]:
    """Dotted paths of keys the schema does not define."""
    unknown = [key for key in document if key not in TOP_LEVEL_KEYS]

    aspects = document.get("aspects") or {}
    if isinstance(aspects, dict):
        for aspect, labels in aspects.items():
            if aspect not in Aspect.__members__:
                unknown.append(f"aspects.{aspect}")
                continue
            for i, label in enumerate(labels or []):
                if isinstance(label, dict):
                    unknown.extend(f"aspects.{aspect}[{i}].{k}" for k in label if k not in LABEL_KEYS)

    for section, allowed in (("time_rules", RULE_KEYS), ("geofences", FENCE_KEYS)):
        for i, item in enumerate(document.get(section) or []):
            if isinstance(item, dict):
                unknown.extend(f"{section}[{i}].{k}" for k in item if k not in allowed)
    return unknown


def _format_location(loc: tuple[Any, ...]) -> str:
    path = ""
    for part in loc:
        if isinstance(part, int):
            path += f"[{part}]"
        else:
            path += f".{part}" if path else str(part)
    return path


def describe_validation_error(error: ValidationError) -> str:
    """First validation failure as ``path: message``."""
    first = error.errors()[0]
    cause = first.get("ctx", {}).get("error")
    message = str(cause) if cause is not None else first["msg"]
    location = _format_location(tuple(first["loc"]))
    return f"{location}: {message}" if location else message


def load_ontology(document: str, strict: bool = False) -> Ontology:
    """
    Parse and validate an ontology document.

    Args:
        document: YAML text with ``version``, ``aspects``, ``time_rules`` and ``geofences``
        strict: Reject keys the schema does not define

    Returns:
        The validated Ontology

    Raises:
        OntologyError: On syntax errors (with line number) or schema/invariant violations
    """
    try:
        data = yaml.safe_load(document)
    except yaml.MarkedYAMLError as e:
        line = e.problem_mark.line + 1 if e.problem_mark is not None else "?"
        raise OntologyError(f"line {line}: {e.problem}") from e
    except yaml.YAMLError as e:
        raise OntologyError(f"malformed ontology document: {e}") from e

    if not isinstance(data, dict):
        raise OntologyError("ontology document must be a mapping")

    if strict:
        unknown = _unknown_keys(data)
        if unknown:
            raise OntologyError(f"{unknown[0]}: unknown key")

    try:
        ontology = Ontology.model_validate(data)
    except ValidationError as e:
        raise OntologyError(describe_validation_error(e)) from e

    logger.debug("Loaded ontology %s with %d labels", ontology.version, ontology.label_count())
    return ontology


def serialize_ontology(ontology: Ontology) -> str:
    """Render ``ontology`` as a YAML document that ``load_ontology`` reads back unchanged."""
    aspects = {}
    for aspect in Aspect:
        if aspect in ontology.aspects:
            aspects[aspect.value] = [
                label.model_dump(mode="json", exclude_none=True) for label in ontology.aspects[aspect]
            ]

    document = {
        "version": ontology.version,
        "aspects": aspects,
        "time_rules": [rule.model_dump(mode="json") for rule in ontology.time_rules],
        "geofences": [
            {"label": fence.label, "polygon": [list(vertex) for vertex in fence.polygon]}
            for fence in ontology.geofences
        ],
    }
    return yaml.safe_dump(document, sort_keys=False, allow_unicode=True)


def load_ontology_file(path: Path, strict: bool = False) -> Ontology:
    """Load an ontology document from disk."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise OntologyError(f"cannot read ontology {path}: {e.strerror}") from e
    return load_ontology(text, strict=strict)


def default_ontology() -> Ontology:
    """The packaged questionnaire ontology."""
    text = resources.files("contextrec.data").joinpath("ontology.yaml").read_text()
    return load_ontology(text, strict=True)
