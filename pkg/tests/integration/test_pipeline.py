"""
End-to-end pipeline runs on small patches.

The H^2 runs finish in seconds; the H^3 runs around a planted sliver are marked slow.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest
from opentelemetry import trace

from src.core import pipeline
from src.core.artifacts import read_manifest, read_mesh, read_report, sha256_file
from src.core.delaunay import SimplexComplex
from src.core.errors import DegeneracyError, StageError
from src.core.pipeline import (
    MANIFEST_FILE,
    MESH_FILE,
    POINTS_FILE,
    REFINED_FILE,
    REPORT_FILE,
    SVG_FILE,
    run_pipeline,
)
from src.core.quality import min_altitude
from src.core.sampling import sample_maximal_net
from src.models.point_set import PatchDomain
from src.models.run import RunConfig
from tests.fixtures.simplices import planted_sliver, point_at


def _config(**overrides: object) -> RunConfig:
    values: dict[str, object] = dict(n=2, mu=10.0, patch_radius=1.2, margin=1.0, seed=7)
    values.update(overrides)
    return RunConfig.model_validate(values)


def test_plane_run_passes_and_writes_every_artifact(output_dir: Path, span_exporter) -> None:
    result = run_pipeline(_config(svg=True), output_dir)

    manifest = result.manifest
    assert manifest.passed
    assert manifest.exit_status == 0
    assert result.report.passed
    assert not result.report.vacuous
    assert manifest.stages == []
    assert set(manifest.stage_timings) == {"sample", "mesh", "refine", "certify", "render"}
    for name in (POINTS_FILE, MESH_FILE, REFINED_FILE, REPORT_FILE, SVG_FILE):
        assert manifest.outputs[name] == sha256_file(output_dir / name)
    assert read_manifest(output_dir / MANIFEST_FILE) == manifest
    assert read_report(output_dir / REPORT_FILE).passed

    refined = read_mesh(output_dir / REFINED_FILE)
    assert refined.achieved_d == manifest.achieved_d
    assert refined.max_displacement == 0.0

    trace.get_tracer_provider().force_flush()
    names = {span.name for span in span_exporter.get_finished_spans()}
    assert {"pipeline.run", "sampler.sample_maximal_net", "delaunay.build"} <= names
    assert "certifier.certify" in names


def test_reruns_are_reproducible(tmp_path: Path) -> None:
    first = run_pipeline(_config(), tmp_path / "first")
    second = run_pipeline(_config(), tmp_path / "second")
    assert first.manifest.fingerprint() == second.manifest.fingerprint()
    assert first.manifest.outputs == second.manifest.outputs


def test_seed_changes_the_net(tmp_path: Path) -> None:
    first = run_pipeline(_config(), tmp_path / "first")
    second = run_pipeline(_config(seed=8), tmp_path / "second")
    assert first.manifest.config_hash != second.manifest.config_hash
    assert first.manifest.outputs[POINTS_FILE] != second.manifest.outputs[POINTS_FILE]


def test_two_points_give_a_vacuous_pass(output_dir: Path) -> None:
    points = [[1.0, 0.0, 0.0], [math.cosh(0.3), math.sinh(0.3), 0.0]]
    result = run_pipeline(_config(input_points=points), output_dir)
    assert result.manifest.exit_status == 0
    assert result.report.vacuous
    assert read_mesh(output_dir / MESH_FILE).top_cells == []


def test_svg_request_is_ignored_above_the_plane(output_dir: Path) -> None:
    points = [[1.0, 0.0, 0.0, 0.0], [math.cosh(0.3), math.sinh(0.3), 0.0, 0.0]]
    result = run_pipeline(_config(n=3, svg=True, input_points=points), output_dir)
    assert SVG_FILE not in result.manifest.outputs
    assert not (output_dir / SVG_FILE).exists()


def test_stage_failures_name_the_stage(
    output_dir: Path, monkeypatch: pytest.MonkeyPatch
) -> None:
    def fail(*_: object, **__: object) -> None:
        raise DegeneracyError("points left out of the triangulation")

    monkeypatch.setattr(pipeline, "build_delaunay", fail)
    with pytest.raises(StageError) as excinfo:
        run_pipeline(_config(), output_dir)
    assert excinfo.value.stage == "mesh"
    assert (output_dir / POINTS_FILE).exists()
    assert not (output_dir / MANIFEST_FILE).exists()


def _planted_net(seed: int) -> list[list[float]]:
    """Maximal 0.05-net of the unit ball grown around a flat sliver and two caps."""
    caps = np.vstack([point_at([0.0, 0.0, 1.0], 0.045), point_at([0.0, 0.0, -1.0], 0.045)])
    anchors = np.vstack([planted_sliver(0.04, 1e-9), caps])
    domain = PatchDomain.centered(3, 1.0, 0.5)
    return sample_maximal_net(domain, 0.05, seed=seed, anchors=anchors).points.tolist()


@pytest.mark.slow
@pytest.mark.parametrize("seed", [3, 8])
def test_space_run_removes_a_planted_sliver(output_dir: Path, seed: int) -> None:
    points = _planted_net(seed)
    planted = min_altitude(np.asarray(points[:4]))
    config = _config(
        n=3, mu=5.0, patch_radius=1.0, margin=0.5, seed=seed, input_points=points
    )

    result = run_pipeline(config, output_dir)

    mesh = SimplexComplex.from_document(read_mesh(output_dir / MESH_FILE))
    assert (0, 1, 2, 3) in mesh.interior_cells()
    assert planted < 1e-7
    assert result.report.passed
    assert result.manifest.passed
    (report,) = result.manifest.stages
    assert report.k == 2
    assert report.bad_after == 0
    assert result.manifest.achieved_d[3] > 0.0
    refined_document = read_mesh(output_dir / REFINED_FILE)
    assert refined_document.max_displacement <= config.epsilon / 10.0
    refined = SimplexComplex.from_document(refined_document)
    assert min_altitude(refined.points[:4]) > 10.0 * planted

