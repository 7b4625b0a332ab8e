"""In-memory entity/relation store for objective context scenes."""

import json
import logging
import threading
from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from contextrec.core.errors import GraphError
from contextrec.ontology.model import Aspect, Ontology

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Entity:
    """A node of a context scene, e.g. a person or a place."""

    id: str
    category: str
    attributes: dict[str, Any] = field(default_factory=dict)
    aspect: Aspect | None = None


@dataclass(frozen=True, order=True)
class Relation:
    """A directed, labeled edge between two entities."""

    source: str
    label: str
    target: str


class ContextGraph:
    """Entities keyed by id plus a set of (source, label, target) triples.

    Mutations take an internal lock; queries read a snapshot and are safe to
    run from several threads between mutations.
    """

    def __init__(self, ontology: Ontology | None = None):
        self.ontology = ontology
        self._entities: dict[str, Entity] = {}
        self._relations: set[Relation] = set()
        self._lock = threading.RLock()

    def __len__(self) -> int:
        return len(self._entities)

    def __contains__(self, entity_id: str) -> bool:
        return entity_id in self._entities

    @property
    def entities(self) -> list[Entity]:
        return [self._entities[key] for key in sorted(self._entities)]

    @property
    def relations(self) -> list[Relation]:
        return sorted(self._relations)

    def get(self, entity_id: str) -> Entity | None:
        return self._entities.get(entity_id)

    def upsert_entity(self, entity: Entity) -> "ContextGraph":
        """
        Add ``entity`` or replace the entity with the same id.

        Raises:
            GraphError: On an empty id or category, or an aspect-tagged
                ``label`` attribute the bound ontology does not know
        """
        if not entity.id:
            raise GraphError("entity id must be nonempty")
        if not entity.category:
            raise GraphError(f"entity {entity.id} has an empty category")
        if self.ontology is not None and entity.aspect is not None and "label" in entity.attributes:
            label = entity.attributes["label"]
            if not self.ontology.has_label(entity.aspect, label):
                raise GraphError(f"entity {entity.id}: {entity.aspect} label {label!r} is not in the ontology")

        with self._lock:
            self._entities[entity.id] = entity
        return self

    def remove_entity(self, entity_id: str) -> "ContextGraph":
        """Delete an entity together with every relation that touches it."""
        with self._lock:
            if entity_id not in self._entities:
                raise GraphError(f"unknown entity {entity_id}")
            del self._entities[entity_id]
            self._relations = {r for r in self._relations if entity_id not in (r.source, r.target)}
        return self

    def assert_relation(self, source: str, label: str, target: str) -> "ContextGraph":
        """
        Record the triple ``(source, label, target)``; repeats are no-ops.

        Raises:
            GraphError: If either endpoint is missing or the label is empty
        """
        if not label:
            raise GraphError("relation label must be nonempty")
        with self._lock:
            for endpoint in (source, target):
                if endpoint not in self._entities:
                    raise GraphError(f"unknown entity {endpoint}")
            self._relations.add(Relation(source, label, target))
        return self

    def relations_of(self, entity_id: str) -> list[Relation]:
        """Triples in which ``entity_id`` is source or target."""
        return sorted(r for r in self._relations if entity_id in (r.source, r.target))

    def query_context(self, aspect: Aspect) -> list[Entity]:
        """Entities tagged with ``aspect``, ordered by id."""
        return [entity for entity in self.entities if entity.aspect == aspect]

    def export_lines(self) -> list[str]:
        """
        Serialize the graph as JSON lines.

        Entity lines come first, ordered by id, with keys
        ``kind, id, category, aspect, attributes``; relation lines follow in
        triple order with keys ``kind, source, label, target``.
        """
        lines = []
        for entity in self.entities:
            record = {
                "kind": "entity",
                "id": entity.id,
                "category": entity.category,
                "aspect": entity.aspect.value if entity.aspect is not None else None,
                "attributes": {key: entity.attributes[key] for key in sorted(entity.attributes)},
            }
            lines.append(json.dumps(record, ensure_ascii=False))
        for relation in self.relations:
            record = {"kind": "relation", "source": relation.source, "label": relation.label, "target": relation.target}
            lines.append(json.dumps(record, ensure_ascii=False))
        return lines

    @classmethod
    def import_lines(cls, lines: Iterable[str], ontology: Ontology | None = None) -> "ContextGraph":
        """Rebuild a graph from ``export_lines`` output; blank lines are ignored."""
        graph = cls(ontology)
        pending: list[tuple[int, dict[str, Any]]] = []
        for number, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise GraphError(f"line {number}: malformed record ({e.msg})") from e
            kind = record.get("kind") if isinstance(record, dict) else None
            if kind == "entity":
                try:
                    aspect = Aspect(record["aspect"]) if record.get("aspect") is not None else None
                    graph.upsert_entity(
                        Entity(
                            id=record["id"],
                            category=record["category"],
                            attributes=dict(record.get("attributes") or {}),
                            aspect=aspect,
                        )
                    )
                except (KeyError, ValueError) as e:
                    raise GraphError(f"line {number}: invalid entity record ({e})") from e
            elif kind == "relation":
                pending.append((number, record))
            else:
                raise GraphError(f"line {number}: unknown record kind {kind!r}")

        # relations may precede the entities they reference
        for number, record in pending:
            try:
                graph.assert_relation(record["source"], record["label"], record["target"])
            except KeyError as e:
                raise GraphError(f"line {number}: relation missing field {e}") from e
            except GraphError as e:
                raise GraphError(f"line {number}: {e.detail}") from e
        logger.debug("Imported graph with %d entities and %d relations", len(graph), len(graph.relations))
        return graph

    def export_file(self, path: Path) -> None:
        Path(path).write_text("".join(line + "\n" for line in self.export_lines()))

    @classmethod
    def import_file(cls, path: Path, ontology: Ontology | None = None) -> "ContextGraph":
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise GraphError(f"cannot read graph {path}: {e.strerror}") from e
        return cls.import_lines(text.splitlines(), ontology)


def classroom_scene(ontology: Ontology | None = None) -> ContextGraph:
    """The lesson scene: a PhD student attending a lesson in a classroom."""
    graph = ContextGraph(ontology)
    graph.upsert_entity(
        Entity(
            id="shen",
            category="Person",
            attributes={"Name": "Shen", "Role": "PhD student", "label": "friend"},
            aspect=Aspect.WO,
        )
    )
    graph.upsert_entity(Entity(id="lesson", category="Lesson", attributes={"label": "lesson"}, aspect=Aspect.WA))
    graph.upsert_entity(
        Entity(
            id="classroom",
            category="Classroom",
            attributes={"Address": "Via Sommarive, 9, 38123 Povo TN", "label": "classroom"},
            aspect=Aspect.WE,
        )
    )
    graph.assert_relation("shen", "Attend", "lesson")
    return graph
