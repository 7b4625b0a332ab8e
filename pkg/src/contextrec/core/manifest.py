"""Run manifests written beside every output."""

import json
import platform
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field

from contextrec import __version__


class RunManifest(BaseModel):
    """Everything needed to replay a run."""

    tool: str = "contextrec"
    version: str = __version__
    command: str
    seed: int | None = None
    config: dict[str, Any] = Field(default_factory=dict)
    outputs: list[str] = Field(default_factory=list)
    extra: dict[str, Any] = Field(default_factory=dict)
    python: str = Field(default_factory=platform.python_version)


def manifest_path(output: Path) -> Path:
    """Sidecar location for an output file or directory."""
    if output.is_dir():
        return output / "manifest.json"
    return output.with_name(output.name + ".manifest.json")


def write_manifest(output: Path, manifest: RunManifest) -> Path:
    """Write ``manifest`` next to ``output`` and return the sidecar path."""
    path = manifest_path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(manifest.model_dump_json(indent=2) + "\n")
    return path


def read_manifest(output: Path) -> RunManifest | None:
    """Load the sidecar manifest for ``output`` if there is one."""
    path = manifest_path(output)
    if not path.exists():
        return None
    return RunManifest.model_validate(json.loads(path.read_text()))
