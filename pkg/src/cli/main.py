"""thicktri command line.

Subcommands:
- sample:    maximal epsilon-net of a patch -> points.json
- mesh:      Delaunay complex of a point set -> mesh.json (and optional .off)
- refine:    sliver perturbation of a mesh -> refined.json
- certify:   thickness certificate of a refined mesh -> report.json (and .svg)
- constants: bound ledger for (n, mu) -> JSON
- pipeline:  every stage plus manifest.json

Exit status: 0 success or certificate pass, 1 certificate fail,
2 usage / parse / validation error, 3 stage failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from pydantic import ValidationError

from src.core.artifacts import (
    read_mesh,
    read_point_set,
    read_run_config,
    write_ledger,
    write_mesh,
    write_point_set,
    write_report,
)
from src.core.bounds import build_ledger
from src.core.config import settings
from src.core.delaunay import SimplexComplex, build_delaunay, write_off
from src.core.errors import (
    ArtifactParseError,
    ArtifactValidationError,
    StageError,
    ThickTriError,
    UsageError,
)
from src.core.pipeline import (
    MESH_FILE,
    POINTS_FILE,
    REFINED_FILE,
    REPORT_FILE,
    certify_document,
    refine_complex,
    run_pipeline,
    sample_points,
    stage,
)
from src.core.plotting import render_svg
from src.models.perturbation import PerturbationMode
from src.models.run import RunConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CERT_FAIL = 1
EXIT_USAGE = 2
EXIT_STAGE = 3

_RUN_FLAGS = ("n", "mu", "patch_radius", "margin", "seed", "mode", "svg", "input_points")


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file mirroring the run flags")
    common.add_argument(
        "--output-dir",
        type=Path,
        help="Artifact directory (default: THICKTRI_OUTPUT_DIR or ./runs)",
    )
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="count", default=0)
    verbosity.add_argument("-q", "--quiet", action="store_true")
    return common


def _run_flags(parser: argparse.ArgumentParser, *, mode: bool = True) -> None:
    parser.add_argument("--n", type=int, help="Dimension of H^n")
    parser.add_argument("--mu", type=float, help="Thickness parameter")
    parser.add_argument("--patch-radius", type=float, help="Hyperbolic patch radius")
    parser.add_argument("--margin", type=float, help="Boundary band width")
    parser.add_argument("--seed", type=int, help="Sampling and perturbation seed")
    if mode:
        parser.add_argument(
            "--mode", choices=[m.value for m in PerturbationMode], help="Perturbation mode"
        )


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="thicktri",
        description="Thick Delaunay triangulations of hyperbolic patches.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    sample = commands.add_parser("sample", parents=[common], help="Sample a maximal net")
    _run_flags(sample, mode=False)
    sample.add_argument("--out", type=Path, help=f"Output file (default {POINTS_FILE})")

    mesh = commands.add_parser("mesh", parents=[common], help="Delaunay-triangulate points")
    mesh.add_argument("--input", type=Path, required=True, help="points.json")
    mesh.add_argument("--out", type=Path, help=f"Output file (default {MESH_FILE})")
    mesh.add_argument("--off", type=Path, help="Also write an OFF export (n = 2, 3)")

    refine = commands.add_parser("refine", parents=[common], help="Perturb slivers away")
    refine.add_argument("--input", type=Path, required=True, help="mesh.json")
    refine.add_argument("--out", type=Path, help=f"Output file (default {REFINED_FILE})")
    refine.add_argument("--mu", type=float, help="Override the mesh's mu")
    refine.add_argument("--seed", type=int, help="Override the mesh's seed")
    refine.add_argument(
        "--mode",
        choices=[m.value for m in PerturbationMode],
        default=PerturbationMode.ADAPTIVE.value,
    )

    certify = commands.add_parser("certify", parents=[common], help="Certify a mesh")
    certify.add_argument("--input", type=Path, required=True, help="refined.json")
    certify.add_argument("--out", type=Path, help=f"Output file (default {REPORT_FILE})")
    certify.add_argument("--mu", type=float, help="Override the mesh's mu")
    certify.add_argument("--svg", type=Path, help="Render the complex as SVG (n = 2)")

    constants = commands.add_parser("constants", parents=[common], help="Bound ledger")
    constants.add_argument("--n", type=int, required=True)
    constants.add_argument("--mu", type=float, required=True)
    constants.add_argument("--out", type=Path, help="Output file (default stdout)")

    pipeline = commands.add_parser("pipeline", parents=[common], help="Run every stage")
    _run_flags(pipeline)
    pipeline.add_argument("--svg", action="store_true", default=None, help="Write mesh.svg")
    return parser


def configure_logging(args: argparse.Namespace) -> None:
    if args.quiet:
        level = logging.WARNING
    elif args.verbose:
        level = logging.DEBUG
    else:
        level = getattr(logging, settings.log_level.upper(), logging.INFO)
    logging.basicConfig(level=level, format="[%(levelname)s] %(message)s", force=True)


def _output_dir(args: argparse.Namespace, file_values: dict[str, Any]) -> Path:
    if args.output_dir is not None:
        return Path(args.output_dir)
    if file_values.get("output_dir"):
        return Path(file_values["output_dir"])
    return settings.thicktri_output_dir


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """RunConfig from the config file with command-line flags taking precedence."""
    values: dict[str, Any] = read_run_config(args.config) if args.config else {}
    for name in _RUN_FLAGS:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    values["output_dir"] = _output_dir(args, values)
    values["verbosity"] = -1 if args.quiet else min(args.verbose, 2)
    return RunConfig.model_validate(values)


def _destination(args: argparse.Namespace, default_name: str) -> Path:
    if args.out is not None:
        return Path(args.out)
    file_values = read_run_config(args.config) if args.config else {}
    return _output_dir(args, file_values) / default_name


def cmd_sample(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    with stage("sample"):
        ps = sample_points(config)
    out = _destination(args, POINTS_FILE)
    write_point_set(ps, out)
    logger.info("✅ wrote %d points to %s", len(ps), out)
    return EXIT_OK


def cmd_mesh(args: argparse.Namespace) -> int:
    ps = read_point_set(args.input)
    with stage("mesh"):
        complex_ = build_delaunay(ps)
    out = _destination(args, MESH_FILE)
    write_mesh(complex_.to_document(), out)
    if args.off is not None:
        write_off(complex_, args.off)
    logger.info("✅ wrote %d top cells to %s", len(complex_), out)
    return EXIT_OK


def cmd_refine(args: argparse.Namespace) -> int:
    document = read_mesh(args.input)
    mu = args.mu if args.mu is not None else document.mu
    if mu is None:
        raise UsageError("refine needs --mu or a mesh that stores mu")
    complex_ = SimplexComplex.from_document(document)
    seed = args.seed if args.seed is not None else document.seed
    with stage("refine"):
        result = refine_complex(complex_, mu, PerturbationMode(args.mode), seed)
    out = _destination(args, REFINED_FILE)
    refined = result.complex.to_document(
        achieved_d=result.achieved_d, max_displacement=result.max_displacement
    )
    write_mesh(refined.model_copy(update={"mu": mu}), out)
    logger.info("✅ refined mesh written to %s (d=%s)", out, result.achieved_d)
    return EXIT_OK


def cmd_certify(args: argparse.Namespace) -> int:
    document = read_mesh(args.input)
    with stage("certify"):
        report = certify_document(document, args.mu)
    out = _destination(args, REPORT_FILE)
    write_report(report, out)
    if args.svg is not None:
        render_svg(SimplexComplex.from_document(document), args.svg)
    return EXIT_OK if report.passed else EXIT_CERT_FAIL


def cmd_constants(args: argparse.Namespace) -> int:
    with stage("constants"):
        ledger = build_ledger(args.n, args.mu)
    if args.out is not None:
        write_ledger(ledger, args.out)
    else:
        sys.stdout.write(ledger.model_dump_json(indent=2) + "\n")
    return EXIT_OK


def cmd_pipeline(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    result = run_pipeline(config)
    return result.manifest.exit_status


COMMANDS = {
    "sample": cmd_sample,
    "mesh": cmd_mesh,
    "refine": cmd_refine,
    "certify": cmd_certify,
    "constants": cmd_constants,
    "pipeline": cmd_pipeline,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    configure_logging(args)

    try:
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        logger.error("❌ invalid configuration: %s", exc.errors()[0].get("msg"))
        return EXIT_USAGE
    except (UsageError, ArtifactParseError, ArtifactValidationError) as exc:
        logger.error("❌ %s", exc)
        return EXIT_USAGE
    except StageError as exc:
        logger.error("❌ %s", exc)
        return EXIT_STAGE
    except ThickTriError as exc:
        logger.error("❌ %s failed: %s", args.command, exc)
        return EXIT_STAGE
    except FileNotFoundError as exc:
        logger.error("❌ missing input: %s", exc.filename)
        return EXIT_USAGE


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
