"""Serialized form of a simplicial complex."""

from __future__ import annotations

from itertools import combinations
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.core.config import settings

from .common import FloatArray, lift_to_hyperboloid
from .point_set import PatchDomain


class MeshDocument(BaseModel):
    """
    Mesh artifact.

    cells maps "1".."n" to sorted vertex-id tuples; interior is aligned with
    cells[str(n)].
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int = Field(..., ge=2)
    epsilon: float = Field(..., gt=0.0)
    seed: int
    mu: Optional[float] = Field(None, gt=0.0)
    domain: Optional[PatchDomain] = None
    points: FloatArray = Field(..., description="(N, n+1) hyperboloid coordinates")
    cells: dict[str, list[list[int]]] = Field(default_factory=dict)
    interior: list[bool] = Field(default_factory=list)
    achieved_d: Optional[dict[int, float]] = Field(
        None, description="Achieved altitude bound per dimension (refined meshes)"
    )
    max_displacement: Optional[float] = Field(
        None, ge=0.0, description="Largest displacement from the original net"
    )

    @field_validator("points")
    @classmethod
    def validate_points(cls, value: np.ndarray) -> np.ndarray:
        if value.ndim != 2 or value.shape[0] == 0:
            raise ValueError("points must be a non-empty (N, n+1) array")
        return lift_to_hyperboloid(value, settings.geometric_tolerance)

    @model_validator(mode="after")
    def validate_complex(self) -> MeshDocument:
        if self.points.shape[1] != self.n + 1:
            raise ValueError("point dimension does not match n")
        count = self.points.shape[0]
        expected = {str(k) for k in range(1, self.n + 1)}
        if self.cells and set(self.cells) != expected:
            raise ValueError(f"cells must be keyed by {sorted(expected)}")
        for key, cells in self.cells.items():
            size = int(key) + 1
            for cell in cells:
                if len(cell) != size or list(cell) != sorted(set(cell)):
                    raise ValueError(f"cell {cell} is not a sorted {key}-simplex")
                if cell[0] < 0 or cell[-1] >= count:
                    raise ValueError(f"cell {cell} references a missing vertex")
        for k in range(2, self.n + 1):
            lower = {tuple(face) for face in self.cells.get(str(k - 1), [])}
            for cell in self.cells.get(str(k), []):
                for face in combinations(cell, k):
                    if face not in lower:
                        raise ValueError(
                            f"face closure: {list(face)} of {cell} is not stored"
                        )
        if len(self.interior) != len(self.cells.get(str(self.n), [])):
            raise ValueError("interior flags must align with the top cells")
        return self

    @property
    def top_cells(self) -> list[list[int]]:
        return self.cells.get(str(self.n), [])
