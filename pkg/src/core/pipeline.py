"""Sample -> mesh -> refine -> certify, with artifacts and a run manifest."""

from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, NamedTuple, Optional

import numpy as np

from src import __version__
from src.models.mesh import MeshDocument
from src.models.perturbation import PerturbationMode
from src.models.point_set import PatchDomain, PointSet
from src.models.quality import CertReport, QualityParams
from src.models.run import RunConfig, RunManifest

from .artifacts import (
    config_hash,
    sha256_file,
    write_manifest,
    write_mesh,
    write_point_set,
    write_report,
)
from .bounds import h0_bound, quality_params
from .certification import certify
from .config import settings
from .delaunay import SimplexComplex, build_delaunay
from .errors import (
    ArtifactParseError,
    ArtifactValidationError,
    StageError,
    ThickTriError,
    UsageError,
)
from .perturbation import RefineResult, refine
from .plotting import render_svg
from .sampling import genericity_jitter, sample_maximal_net
from .telemetry import annotate_span, trace_operation

logger = logging.getLogger(__name__)

POINTS_FILE = "points.json"
MESH_FILE = "mesh.json"
REFINED_FILE = "refined.json"
REPORT_FILE = "report.json"
MANIFEST_FILE = "manifest.json"
SVG_FILE = "mesh.svg"

_PASSTHROUGH = (UsageError, ArtifactParseError, ArtifactValidationError, StageError)


class PipelineResult(NamedTuple):
    manifest: RunManifest
    report: CertReport
    output_dir: Path


@contextmanager
def stage(name: str, timings: Optional[dict[str, float]] = None) -> Iterator[None]:
    """Time a stage and wrap its algorithmic failures in StageError."""
    started = time.perf_counter()
    logger.info("🚀 stage %s", name)
    try:
        yield
    except _PASSTHROUGH:
        raise
    except ThickTriError as exc:
        logger.error("❌ stage %s failed: %s", name, exc)
        raise StageError(name, exc) from exc
    finally:
        if timings is not None:
            timings[name] = time.perf_counter() - started


def jitter_magnitude(epsilon: float) -> float:
    """Largest admissible genericity jitter, delta / 1000 with delta = eps / 10."""
    return epsilon / 10.0 / 1000.0


def sample_points(config: RunConfig) -> PointSet:
    """Sampled (or explicitly given) vertex set of the run."""
    domain = PatchDomain.centered(config.n, config.patch_radius, config.margin)
    if config.input_points is not None:
        return PointSet(
            n=config.n,
            epsilon=config.epsilon,
            seed=config.seed,
            points=np.asarray(config.input_points, dtype=float),
            domain=domain,
            mu=config.mu,
        )
    net = sample_maximal_net(domain, config.epsilon, config.seed)
    jittered = genericity_jitter(net, jitter_magnitude(config.epsilon), config.seed)
    return PointSet(
        n=config.n,
        epsilon=config.epsilon,
        seed=config.seed,
        points=jittered.points,
        domain=domain,
        mu=config.mu,
    )


def refine_params(n: int, mu: float, mode: PerturbationMode) -> QualityParams:
    if mode is PerturbationMode.THEORETICAL:
        return quality_params(n, mu)
    base = QualityParams.from_mu(n, mu)
    return QualityParams.from_mu(n, mu, d={2: h0_bound(base.a, base.b, base.c)})


def refine_complex(
    complex_: SimplexComplex, mu: float, mode: PerturbationMode, seed: int
) -> RefineResult:
    return refine(complex_, refine_params(complex_.n, mu, mode), mode=mode, seed=seed)


def certify_document(document: MeshDocument, mu: Optional[float] = None) -> CertReport:
    """Certificate of a stored (refined) mesh."""
    mu = mu if mu is not None else document.mu
    if mu is None:
        raise UsageError("certification needs mu: pass it or store it in the mesh")
    complex_ = SimplexComplex.from_document(document)
    base = QualityParams.from_mu(document.n, mu)
    achieved = document.achieved_d
    if achieved is None:
        if document.n != 2:
            raise UsageError("mesh carries no achieved_d; refine it first")
        achieved = {2: h0_bound(base.a, base.b, base.c)}
    params = QualityParams.from_mu(document.n, mu, d=dict(achieved))
    return certify(complex_, params, achieved, document.max_displacement)


@trace_operation("pipeline", "run")
def run_pipeline(config: RunConfig, output_dir: Optional[Path] = None) -> PipelineResult:
    """
    Run every stage and write points, mesh, refined mesh, report and manifest.

    The manifest's exit_status is 0 when certification passes and 1 otherwise.
    """
    target = Path(output_dir or config.output_dir or settings.thicktri_output_dir)
    target.mkdir(parents=True, exist_ok=True)
    timings: dict[str, float] = {}
    outputs: dict[str, str] = {}

    with stage("sample", timings):
        ps = sample_points(config)
    outputs[POINTS_FILE] = write_point_set(ps, target / POINTS_FILE)
    logger.info("✅ %d points in H^%d", len(ps), config.n)

    with stage("mesh", timings):
        complex_ = build_delaunay(ps)
    outputs[MESH_FILE] = write_mesh(complex_.to_document(), target / MESH_FILE)

    with stage("refine", timings):
        result = refine_complex(complex_, config.mu, config.mode, config.seed)
    refined = result.complex.to_document(
        achieved_d=result.achieved_d, max_displacement=result.max_displacement
    )
    outputs[REFINED_FILE] = write_mesh(refined, target / REFINED_FILE)

    with stage("certify", timings):
        report = certify(
            result.complex, result.params, result.achieved_d, result.max_displacement
        )
    outputs[REPORT_FILE] = write_report(report, target / REPORT_FILE)

    if config.svg:
        if config.n == 2:
            with stage("render", timings):
                render_svg(result.complex, target / SVG_FILE)
            outputs[SVG_FILE] = sha256_file(target / SVG_FILE)
        else:
            logger.warning("⚠️ --svg ignored: rendering supports n = 2 only")

    manifest = RunManifest(
        tool_version=__version__,
        config_hash=config_hash(config),
        config=config.hashed_fields(),
        outputs=outputs,
        stage_timings=timings,
        stages=result.reports,
        achieved_d=result.achieved_d,
        passed=report.passed,
        exit_status=0 if report.passed else 1,
    )
    write_manifest(manifest, target / MANIFEST_FILE)
    annotate_span(n=config.n, points=len(ps), passed=report.passed)
    logger.info("💾 run artifacts in %s", target)
    return PipelineResult(manifest=manifest, report=report, output_dir=target)
