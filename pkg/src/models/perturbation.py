"""Perturbation mode and per-stage reporting."""

from __future__ import annotations

from enum import Enum

from pydantic import BaseModel, Field


class PerturbationMode(str, Enum):
    """
    How the per-stage altitude target is chosen.

    Values:
        THEORETICAL: use the solved d schedule, fail hard when trials run out
        ADAPTIVE: start from d_k / divisor and halve whenever trials run out
    """

    THEORETICAL = "theoretical"
    ADAPTIVE = "adaptive"


class StageReport(BaseModel):
    """Outcome of one k -> k+1 perturbation stage."""

    k: int = Field(..., ge=2, description="Stage dimension (simplices up to k+1 fixed)")
    delta_next: float = Field(..., gt=0.0, description="Perturbation radius delta_{k+1}")
    target_d: float = Field(..., gt=0.0, description="Initial altitude target")
    achieved_d: float = Field(..., gt=0.0, description="Final altitude target")
    halvings: int = Field(0, ge=0, description="Adaptive target halvings")
    vertices_processed: int = Field(..., ge=0)
    vertices_moved: int = Field(..., ge=0)
    total_trials: int = Field(..., ge=0)
    max_candidates: int = Field(0, ge=0, description="Largest candidate list of the stage")
    candidate_bound: int = Field(0, ge=0, description="Counting bound on candidates")
    max_displacement: float = Field(0.0, ge=0.0)
    bad_after: int = Field(
        0, ge=0, description="Interior simplices of dimension <= k+1 failing the audit"
    )
    elapsed_s: float = Field(0.0, ge=0.0)
