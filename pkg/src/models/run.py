"""Pipeline run configuration and manifest."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from .perturbation import PerturbationMode, StageReport


class RunConfig(BaseModel):
    """
    Configuration of a pipeline run; mirrors every CLI flag.

    Validated against the parameter ledger before any stage runs:
    margin >= 10 eps, patch_radius > margin, eps < patch_radius / 10.
    """

    n: int = Field(..., ge=2, description="Dimension of H^n")
    mu: float = Field(..., gt=0.0, description="Thickness parameter")
    patch_radius: float = Field(..., gt=0.0, description="Hyperbolic patch radius")
    margin: float = Field(..., gt=0.0, description="Boundary band width")
    seed: int = Field(0, ge=0, description="Seed for sampling and perturbation")
    mode: PerturbationMode = Field(PerturbationMode.ADAPTIVE)
    output_dir: Optional[Path] = Field(
        None, description="Artifact directory, THICKTRI_OUTPUT_DIR when unset"
    )
    verbosity: int = Field(0, ge=-1, le=2, description="-1 quiet, 0 info, 1+ debug")
    svg: bool = Field(False, description="Render mesh.svg for n = 2")
    input_points: Optional[list[list[float]]] = Field(
        None, description="Explicit hyperboloid coordinates replacing the sampler"
    )

    @field_validator("input_points")
    @classmethod
    def validate_input_points(
        cls, value: Optional[list[list[float]]]
    ) -> Optional[list[list[float]]]:
        if value is not None and not value:
            raise ValueError("input_points must not be empty")
        return value

    @model_validator(mode="after")
    def validate_patch(self) -> RunConfig:
        epsilon = self.epsilon
        if self.margin < 10.0 * epsilon:
            raise ValueError("margin must be at least 10 epsilon")
        if not self.patch_radius > self.margin:
            raise ValueError("patch_radius must exceed margin")
        if not epsilon < self.patch_radius / 10.0:
            raise ValueError("epsilon must be below patch_radius / 10")
        if self.input_points is not None:
            widths = {len(row) for row in self.input_points}
            if widths != {self.n + 1}:
                raise ValueError("input_points rows must have n+1 coordinates")
        return self

    @property
    def epsilon(self) -> float:
        return self.mu / 100.0

    def hashed_fields(self) -> dict[str, Any]:
        """Fields that determine the artifacts (output location and verbosity excluded)."""
        return self.model_dump(mode="json", exclude={"output_dir", "verbosity"})


class RunManifest(BaseModel):
    """Provenance of a pipeline run."""

    tool_version: str
    config_hash: str = Field(..., min_length=64, max_length=64)
    config: dict[str, Any]
    inputs: dict[str, str] = Field(
        default_factory=dict, description="Input artifact name -> sha256"
    )
    outputs: dict[str, str] = Field(
        default_factory=dict, description="Output artifact name -> sha256"
    )
    stage_timings: dict[str, float] = Field(
        default_factory=dict, description="Wall-clock seconds per stage"
    )
    stages: list[StageReport] = Field(
        default_factory=list, description="Perturbation stage reports"
    )
    achieved_d: dict[int, float] = Field(default_factory=dict)
    passed: bool
    exit_status: int = Field(..., ge=0)

    def fingerprint(self) -> dict[str, Any]:
        """Everything except timings; identical for reruns of one config."""
        return self.model_dump(
            mode="json",
            exclude={"stage_timings": True, "stages": {"__all__": {"elapsed_s"}}},
        )
