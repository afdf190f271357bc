"""Tests for run reports and the artifact manifest."""

import json
from enum import Enum
from pathlib import Path

import numpy as np

from carnotmod.report import Artifact, RunManifest, dumps, to_jsonable, write_csv, write_json


class Color(str, Enum):
    RED = "red"


class TestJson:
    def test_numpy_values(self):
        data = to_jsonable({"a": np.float64(1.5), "b": np.int64(3), "c": np.array([1, 2]), "d": np.bool_(True)})
        assert data == {"a": 1.5, "b": 3, "c": [1, 2], "d": True}
        assert type(data["b"]) is int

    def test_non_finite_floats_become_null(self):
        assert json.loads(dumps({"x": float("nan"), "y": np.inf, "z": [1.0, -np.inf]})) == {
            "x": None,
            "y": None,
            "z": [1.0, None],
        }

    def test_enums_and_paths(self):
        assert to_jsonable({"kind": Color.RED, "path": Path("out/r.json")}) == {
            "kind": "red",
            "path": "out/r.json",
        }

    def test_keys_are_sorted(self):
        assert dumps({"b": 1, "a": 2}, indent=None) == '{"a": 2, "b": 1}'

    def test_write_json_creates_parents(self, tmp_path: Path):
        path = write_json(tmp_path / "runs" / "report.json", {"value": np.float32(0.5)})
        assert json.loads(path.read_text()) == {"value": 0.5}
        assert path.read_text().endswith("\n")


class TestCsv:
    def test_crlf_line_ends(self, tmp_path: Path):
        path = write_csv(tmp_path / "trend.csv", [{"level": 0, "value": 1.5}, {"level": 1, "value": 0.75}])
        assert path.read_bytes() == b"level,value\r\n0,1.5\r\n1,0.75\r\n"

    def test_missing_and_infinite_values_are_empty(self, tmp_path: Path):
        path = write_csv(tmp_path / "trend.csv", [{"level": 0, "value": np.inf}, {"level": 1}], ["level", "value"])
        assert path.read_bytes() == b"level,value\r\n0,\r\n1,\r\n"

    def test_quoting(self, tmp_path: Path):
        path = write_csv(tmp_path / "t.csv", [{"label": "a,b"}])
        assert path.read_bytes() == b'label\r\n"a,b"\r\n'


class TestArtifact:
    def test_to_dict(self):
        artifact = Artifact("out/report.json", "report", "crofton-verify", "Crofton report")
        assert artifact.to_dict() == {
            "path": "out/report.json",
            "kind": "report",
            "experiment": "crofton-verify",
            "description": "Crofton report",
        }


class TestRunManifest:
    def test_add_artifacts(self):
        manifest = RunManifest()
        manifest.add("out/report.json", "report", "modulus-solve")
        manifest.add("out/report.csv", "table", "modulus-solve")

        assert len(manifest.artifacts) == 2
        assert manifest.artifacts[0].kind == "report"
        assert manifest.artifacts[1].kind == "table"

    def test_method_chaining(self):
        manifest = (
            RunManifest()
            .add("a.json", "report", "group-selftest")
            .add("b.json", "report", "haar-test")
            .add("b.csv", "table", "haar-test", description="moments")
        )
        assert len(manifest.artifacts) == 3
        assert manifest.paths("table") == [Path("b.csv")]

    def test_to_json(self):
        manifest = RunManifest(version="0.1.0")
        manifest.add("out/report.json", "report", "crofton-verify")

        data = json.loads(manifest.to_json())
        assert data["version"] == 1
        assert data["library_version"] == "0.1.0"
        assert len(data["artifacts"]) == 1
        assert data["artifacts"][0]["experiment"] == "crofton-verify"

    def test_save_and_load(self, tmp_path: Path):
        manifest = RunManifest(version="0.1.0")
        manifest.add("runs/r.json", "report", "corollary-trend")
        manifest.add("runs/r.csv", "table", "corollary-trend", description="trend")

        # Save
        output_file = tmp_path / "runs" / "r.manifest.json"
        manifest.save(output_file)
        assert output_file.exists()

        # Load
        loaded = RunManifest.load(output_file)
        assert loaded.version == "0.1.0"
        assert [a.to_dict() for a in loaded.artifacts] == [a.to_dict() for a in manifest.artifacts]

    def test_empty_manifest(self):
        data = json.loads(RunManifest().to_json())
        assert data["artifacts"] == []
