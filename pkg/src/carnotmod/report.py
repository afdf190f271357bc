"""Run reports and the artifact manifest.

Every experiment run writes a JSON report and, for trend experiments, a CSV
table. The run manifest lists what was written so a batch of runs can be
collected without globbing output directories.
"""

import csv
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Literal

import numpy as np

ArtifactKind = Literal["report", "table", "problem", "fixture"]


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays, enums and paths into plain JSON values.

    Non-finite floats become ``None`` so the output stays strict JSON.
    """
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def dumps(payload: Any, indent: int | None = 2) -> str:
    """Deterministic JSON: sorted keys, no NaN/Infinity literals."""
    return json.dumps(to_jsonable(payload), indent=indent, sort_keys=True, allow_nan=False, ensure_ascii=False)


def write_json(path: str | Path, payload: Any) -> Path:
    output_path = Path(path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(dumps(payload) + "\n", encoding="utf-8")
    return output_path


def write_csv(path: str | Path, rows: list[dict[str, Any]], fieldnames: list[str] | None = None) -> Path:
    """Write records as an RFC 4180 table (CRLF line ends, minimal quoting)."""
    output_path = Path(path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    if fieldnames is None:
        fieldnames = list(rows[0]) if rows else []
    with output_path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=fieldnames, lineterminator="\r\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: "" if (v := to_jsonable(row.get(k))) is None else v for k in fieldnames})
    return output_path


@dataclass
class Artifact:
    """A file written by a run.

    Attributes:
        path: Output path, as written
        kind: "report" (JSON), "table" (CSV), "problem" or "fixture"
        experiment: Experiment that produced it
        description: One-line description shown by the CLI
    """

    path: str
    kind: ArtifactKind
    experiment: str
    description: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "path": self.path,
            "kind": self.kind,
            "experiment": self.experiment,
            "description": self.description,
        }


@dataclass
class RunManifest:
    """Artifacts written by one or more experiment runs.

    Usage:
        manifest = RunManifest(version="0.1.0")
        manifest.add("out/report.json", "report", "crofton-verify")
        manifest.add("out/trend.csv", "table", "corollary-trend")
        manifest.save("out/manifest.json")
    """

    version: str = ""
    artifacts: list[Artifact] = field(default_factory=list)

    def add(
        self,
        path: str | Path,
        kind: ArtifactKind,
        experiment: str,
        *,
        description: str = "",
    ) -> "RunManifest":
        """Record an artifact.

        Args:
            path: Output path of the artifact
            kind: Artifact kind
            experiment: Experiment name
            description: Optional description

        Returns:
            Self for method chaining
        """
        self.artifacts.append(Artifact(str(path), kind, experiment, description))
        return self

    def paths(self, kind: ArtifactKind | None = None) -> list[Path]:
        return [Path(a.path) for a in self.artifacts if kind is None or a.kind == kind]

    def to_dict(self) -> dict[str, Any]:
        return {
            "version": 1,
            "library_version": self.version,
            "artifacts": [artifact.to_dict() for artifact in self.artifacts],
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def save(self, path: str | Path) -> Path:
        """Write the manifest to disk.

        Args:
            path: Output path

        Returns:
            Path to the written file
        """
        output_path = Path(path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        output_path.write_text(self.to_json(), encoding="utf-8")
        return output_path

    @classmethod
    def from_json(cls, json_str: str) -> "RunManifest":
        data = json.loads(json_str)
        manifest = cls(version=data.get("library_version", ""))
        for item in data.get("artifacts", []):
            manifest.add(
                item["path"],
                item["kind"],
                item["experiment"],
                description=item.get("description", ""),
            )
        return manifest

    @classmethod
    def load(cls, path: str | Path) -> "RunManifest":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))
