"""Knowledge graph of objective context scenes."""

from contextrec.graph.store import ContextGraph, Entity, Relation, classroom_scene

__all__ = ["ContextGraph", "Entity", "Relation", "classroom_scene"]
