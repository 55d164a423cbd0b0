"""Unit tests for JSON artifact persistence."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from src.core.artifacts import (
    config_hash,
    load_json,
    read_mesh,
    read_point_set,
    read_run_config,
    sha256_file,
    write_mesh,
    write_point_set,
)
from src.core.delaunay import build_delaunay
from src.core.errors import ArtifactParseError, ArtifactValidationError
from src.models.point_set import PointSet
from src.models.run import RunConfig


def test_point_set_round_trip_keeps_every_bit(small_net: PointSet, tmp_path: Path) -> None:
    target = tmp_path / "points.json"
    digest = write_point_set(small_net, target)
    assert digest == sha256_file(target)
    restored = read_point_set(target)
    assert np.array_equal(restored.points, small_net.points)
    assert restored.domain.radius == small_net.domain.radius
    assert target.read_text(encoding="utf-8").endswith("}\n")


def test_mesh_artifact_is_stable(small_net: PointSet, tmp_path: Path) -> None:
    document = build_delaunay(small_net).to_document()
    first = write_mesh(document, tmp_path / "a" / "mesh.json")
    second = write_mesh(read_mesh(tmp_path / "a" / "mesh.json"), tmp_path / "b" / "mesh.json")
    assert first == second


def test_parse_error_reports_line_and_column(tmp_path: Path) -> None:
    target = tmp_path / "broken.json"
    target.write_text('{\n  "n": 2,\n  "mu": \n}\n', encoding="utf-8")
    with pytest.raises(ArtifactParseError) as excinfo:
        load_json(target)
    assert excinfo.value.line == 4
    assert excinfo.value.column == 1
    assert str(target) in str(excinfo.value)


def test_validation_error_names_the_invariant(tmp_path: Path) -> None:
    target = tmp_path / "points.json"
    target.write_text(
        json.dumps({"epsilon": 0.1, "seed": 0, "points": [[1.0, 0.5, 0.0]]}), encoding="utf-8"
    )
    with pytest.raises(ArtifactValidationError) as excinfo:
        read_point_set(target)
    assert excinfo.value.invariant == "PointSet.points"


def test_run_config_file_must_hold_an_object(tmp_path: Path) -> None:
    target = tmp_path / "config.json"
    target.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ArtifactValidationError):
        read_run_config(target)
    target.write_text('{"n": 2}', encoding="utf-8")
    assert read_run_config(target) == {"n": 2}


def test_config_hash_ignores_location_and_verbosity(tmp_path: Path) -> None:
    base = RunConfig(n=2, mu=10.0, patch_radius=1.2, margin=1.0)
    moved = base.model_copy(update={"output_dir": tmp_path, "verbosity": 2})
    reseeded = base.model_copy(update={"seed": 1})
    assert config_hash(base) == config_hash(moved)
    assert config_hash(base) != config_hash(reseeded)
    assert len(config_hash(base)) == 64
