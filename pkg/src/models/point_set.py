"""Sampling domain and point-set models."""

from __future__ import annotations

from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.core.config import settings

from .common import FloatArray, lift_to_hyperboloid
from .geometry import HPoint


def _distance_from(center: np.ndarray, points: np.ndarray) -> np.ndarray:
    diff = np.atleast_2d(points) - center
    form = -diff[:, 0] ** 2 + np.sum(diff[:, 1:] ** 2, axis=1)
    return 2.0 * np.arcsinh(np.sqrt(np.maximum(form, 0.0)) / 2.0)


class PatchDomain(BaseModel):
    """
    Geodesic ball standing in for the thick part of a manifold.

    Only simplices whose circumballs stay inside the shrunk ball
    (radius - margin) carry quality guarantees.
    """

    center: HPoint = Field(..., description="Center of the patch ball")
    radius: float = Field(..., gt=0.0, description="Hyperbolic radius of the patch")
    margin: float = Field(
        ..., gt=0.0, description="Boundary band excluded from quality guarantees"
    )

    @model_validator(mode="after")
    def validate_margin(self) -> PatchDomain:
        if not self.radius > self.margin:
            raise ValueError("patch radius must exceed the margin")
        return self

    @property
    def n(self) -> int:
        return self.center.n

    @property
    def shrunk_radius(self) -> float:
        return self.radius - self.margin

    @classmethod
    def centered(cls, n: int, radius: float, margin: float) -> PatchDomain:
        return cls(center=HPoint.origin(n), radius=radius, margin=margin)

    def distance_to_center(self, points: np.ndarray) -> np.ndarray:
        return _distance_from(self.center.coords, points)

    def contains(self, points: np.ndarray) -> np.ndarray:
        return self.distance_to_center(points) <= self.radius

    def in_shrunk(self, points: np.ndarray) -> np.ndarray:
        return self.distance_to_center(points) <= self.shrunk_radius


class PointSet(BaseModel):
    """
    Indexed sample points of H^n.

    Attributes:
        points: (N, n+1) hyperboloid coordinates, row i is vertex i
        epsilon: separation radius the set was sampled with
        seed: RNG seed that produced the set
        domain: patch the points were sampled in, if any
        mu: thickness parameter the run was configured with, if any
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: Optional[int] = Field(None, ge=2, description="Dimension of H^n")
    epsilon: float = Field(..., gt=0.0, description="Separation radius")
    seed: int = Field(..., description="Sampling seed")
    points: FloatArray = Field(..., description="(N, n+1) hyperboloid coordinates")
    domain: Optional[PatchDomain] = Field(None, description="Sampling domain")
    mu: Optional[float] = Field(None, gt=0.0, description="Thickness parameter")

    @field_validator("points")
    @classmethod
    def validate_points(cls, value: np.ndarray) -> np.ndarray:
        if value.ndim != 2 or value.shape[0] == 0:
            raise ValueError("points must be a non-empty (N, n+1) array")
        return lift_to_hyperboloid(value, settings.geometric_tolerance)

    @model_validator(mode="after")
    def validate_dimension(self) -> PointSet:
        dimension = int(self.points.shape[1] - 1)
        if self.n is None:
            self.n = dimension
        elif self.n != dimension:
            raise ValueError(f"n={self.n} does not match point dimension {dimension}")
        if self.domain is not None and self.domain.n != dimension:
            raise ValueError("domain dimension does not match the points")
        return self

    @property
    def dimension(self) -> int:
        return int(self.points.shape[1] - 1)

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def with_points(self, points: np.ndarray) -> PointSet:
        """Copy of this set with replaced coordinates (validated)."""
        return PointSet(
            n=self.n,
            epsilon=self.epsilon,
            seed=self.seed,
            points=points,
            domain=self.domain,
            mu=self.mu,
        )
