"""Simplex quality: edge lengths, altitudes, circumradii, goodness and bad regions.

The batched kernels work on vertex arrays of shape (..., m, n+1) through the
excess matrix E (see hyperbolic.excess_matrix). With mu = E^-1 1, sigma =
sum(mu) and G the Gram matrix of the vertices,

    G^-1 = mu mu^T / (1 + sigma) - E^-1,

the altitude of vertex i satisfies sinh^2 h_i = 1 / (G^-1)_ii and the
circumradius sinh^2 r = 1 / sigma. Dihedral angles follow from the
off-diagonal entries of G^-1 (inward facet normals are its columns).
"""

from __future__ import annotations

import math
from typing import NamedTuple, Optional, Sequence

import numpy as np

from src.models.quality import BadnessKind

from .errors import DegeneracyError
from .hyperbolic import (
    PointLike,
    as_coords,
    batched_inverse,
    circumsphere,
    excess_matrix,
    geodesic_span,
    points_matrix,
)


class SimplexMetrics(NamedTuple):
    """Batched simplex measurements; leading axes follow the input."""

    edges: np.ndarray
    circumradius: np.ndarray
    altitudes: np.ndarray
    dual_gram: np.ndarray


def metrics_from_excess(excess: np.ndarray) -> SimplexMetrics:
    """Edges, circumradius and altitudes from excess matrices (..., m, m), m >= 2."""
    m = excess.shape[-1]
    upper = np.triu_indices(m, k=1)
    edges = 2.0 * np.arcsinh(np.sqrt(excess[..., upper[0], upper[1]] / 2.0))
    inverse = batched_inverse(excess)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        weights = inverse.sum(axis=-1)
        sigma = weights.sum(axis=-1)
        bounded = np.isfinite(sigma) & (sigma > 0.0)
        circumradius = np.where(
            bounded, np.arcsinh(1.0 / np.sqrt(np.where(bounded, sigma, 1.0))), np.inf
        )
        dual = (
            weights[..., :, None] * weights[..., None, :] / (1.0 + sigma)[..., None, None]
            - inverse
        )
        diagonal = np.diagonal(dual, axis1=-2, axis2=-1)
        regular = np.isfinite(diagonal) & (diagonal > 0.0)
        altitudes = np.where(
            regular, np.arcsinh(1.0 / np.sqrt(np.where(regular, diagonal, 1.0))), 0.0
        )
    return SimplexMetrics(
        edges=edges, circumradius=circumradius, altitudes=altitudes, dual_gram=dual
    )


def simplex_metrics(vertices: np.ndarray) -> SimplexMetrics:
    return metrics_from_excess(excess_matrix(vertices))


def window_mask(
    metrics: SimplexMetrics, a: float, b: float, c: Optional[float] = None
) -> np.ndarray:
    """Edges in [a, b] (and circumradius <= c when given)."""
    mask = np.all((metrics.edges >= a) & (metrics.edges <= b), axis=-1)
    if c is not None:
        mask &= metrics.circumradius <= c
    return mask


def good_mask(metrics: SimplexMetrics, a: float, b: float, d: float) -> np.ndarray:
    """(a, b, d)-goodness; altitudes only matter from triangles up."""
    mask = window_mask(metrics, a, b)
    if metrics.altitudes.shape[-1] >= 3:
        mask &= np.all(metrics.altitudes >= d, axis=-1)
    return mask


def _simplex(vertices: Sequence[PointLike] | np.ndarray) -> np.ndarray:
    matrix = points_matrix(vertices)
    if matrix.shape[0] < 2:
        raise DegeneracyError("a simplex needs at least two vertices")
    return matrix


def edge_lengths(vertices: Sequence[PointLike] | np.ndarray) -> list[float]:
    metrics = simplex_metrics(_simplex(vertices))
    return sorted(float(edge) for edge in metrics.edges)


def _check_facet(matrix: np.ndarray, index: int) -> None:
    facet = np.delete(matrix, index, axis=0)
    if facet.shape[0] >= 2:
        geodesic_span(facet)


def all_altitudes(vertices: Sequence[PointLike] | np.ndarray) -> np.ndarray:
    """Altitude of every vertex, measured inside the simplex's geodesic span."""
    matrix = _simplex(vertices)
    for index in range(matrix.shape[0]):
        _check_facet(matrix, index)
    return simplex_metrics(matrix).altitudes


def altitude(vertices: Sequence[PointLike] | np.ndarray, index: int) -> float:
    """Distance from vertex `index` to the hyperplane of the opposite facet."""
    matrix = _simplex(vertices)
    if not 0 <= index < matrix.shape[0]:
        raise IndexError(f"vertex index {index} out of range")
    _check_facet(matrix, index)
    return float(simplex_metrics(matrix).altitudes[index])


def min_altitude(vertices: Sequence[PointLike] | np.ndarray) -> float:
    return float(np.min(all_altitudes(vertices)))


def circumradius_k(vertices: Sequence[PointLike] | np.ndarray) -> float:
    """Circumradius inside the simplex's span; unbounded spheres raise."""
    return circumsphere(_simplex(vertices)).radius


def is_good(
    vertices: Sequence[PointLike] | np.ndarray, a: float, b: float, d: float
) -> bool:
    matrix = _simplex(vertices)
    return bool(good_mask(simplex_metrics(matrix), a, b, d))


def in_bad_region(
    p: PointLike,
    facet: Sequence[PointLike] | np.ndarray,
    a: float,
    b: float,
    c: float,
    d: float,
) -> bool:
    """
    p lies in the (a, b, c, d)-bad region of the facet.

    [p, facet] has every edge in [a, b], circumradius <= c, and p is closer
    than d to the facet's hyperplane (inside their common span).
    """
    matrix = np.vstack([as_coords(p)[None, :], points_matrix(facet)])
    metrics = simplex_metrics(matrix)
    if not bool(window_mask(metrics, a, b, c)):
        return False
    return bool(metrics.altitudes[0] < d)


def in_bad_region_batch(
    points: np.ndarray,
    facet: np.ndarray,
    a: float,
    b: float,
    c: float,
    d: float,
) -> np.ndarray:
    """Vectorized in_bad_region over candidate positions (s, n+1)."""
    count = points.shape[0]
    stacked = np.concatenate(
        [points[:, None, :], np.broadcast_to(facet, (count,) + facet.shape)], axis=1
    )
    metrics = simplex_metrics(stacked)
    return window_mask(metrics, a, b, c) & (metrics.altitudes[:, 0] < d)


def classify_badness(
    vertices: Sequence[PointLike] | np.ndarray,
    a: float,
    b: float,
    c: float,
    d: float,
) -> Optional[BadnessKind]:
    """Reason a simplex is not (a, b, d)-good, or None when it is good."""
    metrics = simplex_metrics(_simplex(vertices))
    return badness_from_metrics(metrics, a, b, c, d)


def badness_from_metrics(
    metrics: SimplexMetrics, a: float, b: float, c: float, d: float
) -> Optional[BadnessKind]:
    if np.any(metrics.edges < a):
        return BadnessKind.SHORT_EDGE
    if np.any(metrics.edges > b):
        return BadnessKind.LONG_EDGE
    if metrics.altitudes.shape[-1] >= 3 and np.any(metrics.altitudes < d):
        if not float(metrics.circumradius) <= c:
            return BadnessKind.LARGE_CIRCUMRADIUS
        return BadnessKind.LOW_ALTITUDE
    return None


def dihedral_from_metrics(metrics: SimplexMetrics) -> np.ndarray:
    """Dihedral angles (..., m(m-1)/2) between facet pairs; NaN for degenerate input."""
    dual = metrics.dual_gram
    m = dual.shape[-1]
    upper = np.triu_indices(m, k=1)
    diagonal = np.diagonal(dual, axis1=-2, axis2=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.sqrt(diagonal[..., upper[0]] * diagonal[..., upper[1]])
        cosine = -dual[..., upper[0], upper[1]] / scale
    return np.arccos(np.clip(cosine, -1.0, 1.0))


def dihedral_angles(vertices: Sequence[PointLike] | np.ndarray) -> np.ndarray:
    """Sorted dihedral angles of a simplex with at least three vertices."""
    matrix = _simplex(vertices)
    if matrix.shape[0] < 3:
        raise DegeneracyError("dihedral angles need at least a triangle")
    angles = dihedral_from_metrics(simplex_metrics(matrix))
    if not np.all(np.isfinite(angles)):
        raise DegeneracyError("dihedral angles undefined for a degenerate simplex")
    return np.sort(angles)


def window_constants(a: float, b: float, c: float) -> tuple[float, float, float]:
    """Excess-matrix thresholds (cosh a - 1, cosh b - 1, 1 / sinh^2 c)."""
    return math.cosh(a) - 1.0, math.cosh(b) - 1.0, 1.0 / math.sinh(c) ** 2
