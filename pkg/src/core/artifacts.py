"""JSON artifact persistence.

Every artifact is a pydantic model written with model_dump_json, so doubles
are emitted as their shortest round-trip repr. Loading translates JSON syntax
errors to ArtifactParseError and model validation errors to
ArtifactValidationError.
"""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, TypeVar

from pydantic import BaseModel, ValidationError

from src.models.mesh import MeshDocument
from src.models.point_set import PointSet
from src.models.quality import BoundLedger, CertReport
from src.models.run import RunConfig, RunManifest

from .errors import ArtifactParseError, ArtifactValidationError

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)


def _invariant_name(exc: ValidationError) -> tuple[str, str]:
    first = exc.errors()[0]
    location = ".".join(str(part) for part in first.get("loc", ())) or "<root>"
    message = str(first.get("msg", "invalid value"))
    return location, message


def load_json(path: Path) -> Any:
    """Parse a JSON file, reporting syntax errors with line and column."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ArtifactParseError(str(path), exc.lineno, exc.colno, exc.msg) from exc


def read_model(path: Path, model: type[ModelT]) -> ModelT:
    data = load_json(path)
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        location, message = _invariant_name(exc)
        raise ArtifactValidationError(f"{model.__name__}.{location}", message) from exc


def write_model(document: BaseModel, path: Path) -> str:
    """Write a model as indented JSON and return the file's sha256."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(document.model_dump_json(indent=2) + "\n", encoding="utf-8")
    digest = sha256_file(path)
    logger.debug("💾 wrote %s (%s)", path, digest[:12])
    return digest


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def config_hash(config: RunConfig) -> str:
    canonical = json.dumps(config.hashed_fields(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def read_point_set(path: Path) -> PointSet:
    return read_model(path, PointSet)


def write_point_set(ps: PointSet, path: Path) -> str:
    return write_model(ps, path)


def read_mesh(path: Path) -> MeshDocument:
    return read_model(path, MeshDocument)


def write_mesh(document: MeshDocument, path: Path) -> str:
    return write_model(document, path)


def read_report(path: Path) -> CertReport:
    return read_model(path, CertReport)


def write_report(report: CertReport, path: Path) -> str:
    return write_model(report, path)


def read_ledger(path: Path) -> BoundLedger:
    return read_model(path, BoundLedger)


def write_ledger(ledger: BoundLedger, path: Path) -> str:
    return write_model(ledger, path)


def read_manifest(path: Path) -> RunManifest:
    return read_model(path, RunManifest)


def write_manifest(manifest: RunManifest, path: Path) -> str:
    return write_model(manifest, path)


def read_run_config(path: Path) -> dict[str, Any]:
    """Raw config-file mapping; validated once merged with CLI flags."""
    data = load_json(path)
    if not isinstance(data, dict):
        raise ArtifactValidationError("RunConfig.<root>", "config file must hold an object")
    return data
