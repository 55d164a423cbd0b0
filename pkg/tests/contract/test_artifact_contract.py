"""
Contract tests for the JSON artifacts of a run.

Downstream tooling reads points.json, mesh.json, refined.json, report.json
and manifest.json by key, so the key sets and their encodings are pinned here.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import pytest

from src.core.pipeline import (
    MANIFEST_FILE,
    MESH_FILE,
    POINTS_FILE,
    REFINED_FILE,
    REPORT_FILE,
    run_pipeline,
)
from src.models.run import RunConfig


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory: pytest.TempPathFactory) -> Path:
    target = tmp_path_factory.mktemp("contract")
    run_pipeline(RunConfig(n=2, mu=10.0, patch_radius=1.2, margin=1.0, seed=3), target)
    return target


def _load(run_dir: Path, name: str) -> dict[str, Any]:
    return json.loads((run_dir / name).read_text(encoding="utf-8"))


class TestPointSetContract:
    def test_keys(self, run_dir: Path) -> None:
        document = _load(run_dir, POINTS_FILE)
        assert {"n", "epsilon", "seed", "points", "domain", "mu"} <= set(document)
        assert {"center", "radius", "margin"} <= set(document["domain"])

    def test_points_are_rows_of_hyperboloid_coordinates(self, run_dir: Path) -> None:
        document = _load(run_dir, POINTS_FILE)
        assert all(len(row) == 3 for row in document["points"])
        assert all(row[0] >= 1.0 for row in document["points"])


class TestMeshContract:
    def test_keys(self, run_dir: Path) -> None:
        document = _load(run_dir, MESH_FILE)
        assert {"n", "epsilon", "seed", "points", "cells", "interior"} <= set(document)
        assert set(document["cells"]) == {"1", "2"}

    def test_interior_flags_follow_top_cells(self, run_dir: Path) -> None:
        document = _load(run_dir, MESH_FILE)
        assert len(document["interior"]) == len(document["cells"]["2"])
        assert all(cell == sorted(cell) for cell in document["cells"]["2"])

    def test_unrefined_mesh_has_no_achieved_d(self, run_dir: Path) -> None:
        assert _load(run_dir, MESH_FILE).get("achieved_d") is None

    def test_refined_mesh_records_achieved_d(self, run_dir: Path) -> None:
        document = _load(run_dir, REFINED_FILE)
        assert set(document["achieved_d"]) == {"2"}
        assert document["max_displacement"] == 0.0


class TestReportContract:
    def test_keys(self, run_dir: Path) -> None:
        document = _load(run_dir, REPORT_FILE)
        expected = {
            "n",
            "params",
            "achieved_d",
            "d_checked",
            "passed",
            "vacuous",
            "interior_cells",
            "good_cells",
            "failed_cells",
            "window_violations",
            "L_estimate",
            "grid_depth",
            "altitude_histogram",
            "dihedral_histogram",
            "records",
            "warnings",
        }
        assert expected <= set(document)

    def test_histograms_pair_edges_with_counts(self, run_dir: Path) -> None:
        histogram = _load(run_dir, REPORT_FILE)["altitude_histogram"]
        assert len(histogram["bin_edges"]) == len(histogram["counts"]) + 1

    def test_records_carry_the_simplex_measurements(self, run_dir: Path) -> None:
        records = _load(run_dir, REPORT_FILE)["records"]
        assert records
        assert {"vertices", "edges", "circumradius", "min_altitude", "good"} <= set(records[0])


class TestManifestContract:
    def test_keys(self, run_dir: Path) -> None:
        document = _load(run_dir, MANIFEST_FILE)
        expected = {
            "tool_version",
            "config_hash",
            "config",
            "inputs",
            "outputs",
            "stage_timings",
            "stages",
            "achieved_d",
            "passed",
            "exit_status",
        }
        assert expected <= set(document)

    def test_outputs_are_sha256_digests(self, run_dir: Path) -> None:
        outputs = _load(run_dir, MANIFEST_FILE)["outputs"]
        assert set(outputs) >= {POINTS_FILE, MESH_FILE, REFINED_FILE, REPORT_FILE}
        assert all(len(digest) == 64 for digest in outputs.values())

    def test_config_excludes_location_and_verbosity(self, run_dir: Path) -> None:
        config = _load(run_dir, MANIFEST_FILE)["config"]
        assert "output_dir" not in config
        assert "verbosity" not in config
        assert config["mode"] == "adaptive"
