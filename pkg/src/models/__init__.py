from .geometry import HPoint, Hyperplane, Sphere
from .mesh import MeshDocument
from .perturbation import PerturbationMode, StageReport
from .point_set import PatchDomain, PointSet
from .quality import (
    BadnessKind,
    BoundLedger,
    CertReport,
    Histogram,
    QualityParams,
    SimplexRecord,
)
from .run import RunConfig, RunManifest

__all__ = [
    "BadnessKind",
    "BoundLedger",
    "CertReport",
    "HPoint",
    "Histogram",
    "Hyperplane",
    "MeshDocument",
    "PatchDomain",
    "PerturbationMode",
    "PointSet",
    "QualityParams",
    "RunConfig",
    "RunManifest",
    "SimplexRecord",
    "Sphere",
    "StageReport",
]
