"""Hyperboloid-model geometry models: points, hyperplanes and spheres."""

from __future__ import annotations

import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.core.config import settings

from .common import FloatArray, lift_to_hyperboloid


class HPoint(BaseModel):
    """
    A point of H^n on the upper sheet of <x, x>_M = -1.

    Attributes:
        coords: n+1 hyperboloid coordinates, first one timelike and positive
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    coords: FloatArray = Field(
        ..., description="Hyperboloid coordinates (x0, x1, ..., xn), x0 > 0"
    )

    @field_validator("coords")
    @classmethod
    def validate_coords(cls, value: np.ndarray) -> np.ndarray:
        if value.ndim != 1:
            raise ValueError("HPoint coordinates must be a flat vector")
        return lift_to_hyperboloid(value, settings.geometric_tolerance)

    @property
    def n(self) -> int:
        return int(self.coords.shape[0] - 1)

    @classmethod
    def origin(cls, n: int) -> HPoint:
        coords = np.zeros(n + 1)
        coords[0] = 1.0
        return cls(coords=coords)


class Hyperplane(BaseModel):
    """Totally geodesic hyperplane {x : <x, normal>_M = 0} with a spacelike unit normal."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    normal: FloatArray = Field(..., description="Spacelike Minkowski-unit normal")

    @field_validator("normal")
    @classmethod
    def validate_normal(cls, value: np.ndarray) -> np.ndarray:
        if value.ndim != 1 or value.shape[0] < 3:
            raise ValueError("normal must be a vector with n+1 >= 3 entries")
        form = float(-value[0] ** 2 + value[1:] @ value[1:])
        if form <= 0.0:
            raise ValueError("normal must be spacelike")
        scale = max(1.0, float(value @ value))
        if abs(form - 1.0) > settings.geometric_tolerance * scale:
            raise ValueError(f"normal is not Minkowski-unit (form {form!r})")
        return value / math.sqrt(form)

    @property
    def n(self) -> int:
        return int(self.normal.shape[0] - 1)


class Sphere(BaseModel):
    """Hyperbolic sphere: center and hyperbolic radius."""

    center: HPoint
    radius: float = Field(..., ge=0.0, description="Hyperbolic radius")

    @field_validator("radius")
    @classmethod
    def validate_radius(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("radius must be finite")
        return value
