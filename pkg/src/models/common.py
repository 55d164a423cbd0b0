from __future__ import annotations

from typing import Annotated, Any

import numpy as np
from pydantic import PlainSerializer, PlainValidator


def _as_float_array(value: Any) -> np.ndarray:
    array = np.array(value, dtype=float)
    if not np.all(np.isfinite(array)):
        raise ValueError("coordinates must be finite")
    return array


def _to_nested_list(array: np.ndarray) -> list[Any]:
    return array.tolist()  # type: ignore[no-any-return]


# numpy array field: accepts nested sequences, serializes to nested lists of floats
FloatArray = Annotated[
    np.ndarray,
    PlainValidator(_as_float_array),
    PlainSerializer(_to_nested_list, return_type=list),
]


def minkowski_form(coords: np.ndarray) -> np.ndarray:
    """Row-wise Minkowski self-product -x0^2 + sum(xi^2)."""
    return -coords[..., 0] ** 2 + np.sum(coords[..., 1:] ** 2, axis=-1)


def lift_to_hyperboloid(coords: np.ndarray, tolerance: float) -> np.ndarray:
    """
    Validate that rows lie on the upper sheet and snap them onto it.

    Rows whose form is further than `tolerance` (relative to x0^2) from -1 are
    rejected; accepted rows keep their spatial part and get x0 recomputed.
    """
    if coords.ndim == 0 or coords.shape[-1] < 3:
        raise ValueError("hyperboloid coordinates need n+1 >= 3 entries")
    if np.any(coords[..., 0] <= 0.0):
        raise ValueError("first coordinate must be positive (upper sheet)")
    residual = np.abs(minkowski_form(coords) + 1.0)
    scale = np.maximum(1.0, coords[..., 0] ** 2)
    if np.any(residual > tolerance * scale):
        worst = float(np.max(residual / scale))
        raise ValueError(f"not on the hyperboloid (relative residual {worst:.3e})")
    snapped = coords.copy()
    snapped[..., 0] = np.sqrt(1.0 + np.sum(coords[..., 1:] ** 2, axis=-1))
    return snapped
