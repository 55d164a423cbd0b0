"""Robust Euclidean orientation and in-sphere predicates in any dimension.

Both predicates evaluate a determinant in doubles and accept the sign when it
clears a Hadamard-style error bound; otherwise the determinant is recomputed
exactly with fractions.Fraction. In-sphere ties that survive exact arithmetic
are broken by perturbing the lifted coordinate of each point, highest
priority to the smallest vertex index.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

# Relative filter threshold on |det| / prod(row norms); LU forward error is far smaller.
_FILTER = 1e-10


def _exact_det(rows: list[list[Fraction]]) -> Fraction:
    """Determinant by fraction-exact Gaussian elimination."""
    matrix = [row[:] for row in rows]
    size = len(matrix)
    det = Fraction(1)
    for col in range(size):
        pivot = next((r for r in range(col, size) if matrix[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            matrix[col], matrix[pivot] = matrix[pivot], matrix[col]
            det = -det
        det *= matrix[col][col]
        inv = 1 / matrix[col][col]
        for r in range(col + 1, size):
            factor = matrix[r][col] * inv
            if factor != 0:
                for c in range(col, size):
                    matrix[r][c] -= factor * matrix[col][c]
    return det


def _sign(value: float | Fraction) -> int:
    return (value > 0) - (value < 0)


def _filtered_sign(matrix: np.ndarray) -> tuple[int, bool]:
    det = float(np.linalg.det(matrix))
    bound = _FILTER * float(np.prod(np.linalg.norm(matrix, axis=1)))
    if abs(det) > bound:
        return _sign(det), True
    return 0, False


def orient(points: np.ndarray) -> int:
    """
    Sign of det[p_1 - p_0, ..., p_d - p_0] for d+1 points of R^d.

    +1 / -1 give the orientation; 0 means the points are affinely dependent.
    """
    pts = np.asarray(points, dtype=float)
    sign, certain = _filtered_sign(pts[1:] - pts[0])
    if certain:
        return sign
    base = [Fraction(x) for x in pts[0]]
    rows = [[Fraction(x) - b for x, b in zip(p, base)] for p in pts[1:]]
    return _sign(_exact_det(rows))


def _lifted_rows(points: np.ndarray, query: np.ndarray) -> list[list[Fraction]]:
    q = [Fraction(x) for x in query]
    rows = []
    for p in points:
        shifted = [Fraction(x) - y for x, y in zip(p, q)]
        rows.append(shifted + [sum(s * s for s in shifted)])
    return rows


def insphere_filter(points: np.ndarray, query: np.ndarray) -> tuple[int, bool]:
    """
    Floating-point in-sphere test of `query` against the sphere through `points`.

    Returns (sign, certain): +1 inside, -1 outside, with certain=False when the
    filter cannot decide.
    """
    pts = np.asarray(points, dtype=float)
    q = np.asarray(query, dtype=float)
    d = pts.shape[1]
    shifted = pts - q
    lifted = np.hstack([shifted, np.sum(shifted**2, axis=1, keepdims=True)])
    lift_sign, lift_certain = _filtered_sign(lifted)
    orient_sign, orient_certain = _filtered_sign(pts[1:] - pts[0])
    if not (lift_certain and orient_certain):
        return 0, False
    return (-1) ** d * lift_sign * orient_sign, True


def insphere_exact(points: np.ndarray, query: np.ndarray) -> int:
    """Exact in-sphere sign; 0 when the d+2 points are co-spherical."""
    pts = np.asarray(points, dtype=float)
    q = np.asarray(query, dtype=float)
    d = pts.shape[1]
    lift_sign = _sign(_exact_det(_lifted_rows(pts, q)))
    return (-1) ** d * lift_sign * orient(pts)


def _homogeneous_rows(points: np.ndarray) -> list[list[Fraction]]:
    rows = []
    for p in points:
        coords = [Fraction(x) for x in p]
        rows.append(coords + [sum(c * c for c in coords), Fraction(1)])
    return rows


def _lift_cofactor(rows: list[list[Fraction]], row: int, lift_col: int) -> Fraction:
    minor = [
        [value for col, value in enumerate(r) if col != lift_col]
        for index, r in enumerate(rows)
        if index != row
    ]
    return (-1) ** (row + lift_col) * _exact_det(minor)


def insphere(
    points: np.ndarray,
    query: np.ndarray,
    indices: Sequence[int] | None = None,
    query_index: int | None = None,
) -> int:
    """
    In-sphere predicate with symbolic tie-breaking; never returns 0 when indices are given.

    +1 means `query` is strictly inside the circumsphere of the d+1 `points`.
    """
    sign, certain = insphere_filter(points, query)
    if certain:
        return sign
    exact = insphere_exact(points, query)
    if exact != 0 or indices is None or query_index is None:
        return exact
    pts = np.asarray(points, dtype=float)
    stacked = np.vstack([pts, np.asarray(query, dtype=float)[None, :]])
    rows = _homogeneous_rows(stacked)
    lift_col = pts.shape[1]
    order = list(indices) + [query_index]
    query_cofactor = _lift_cofactor(rows, len(order) - 1, lift_col)
    for row in sorted(range(len(order)), key=lambda r: order[r]):
        cofactor = _lift_cofactor(rows, row, lift_col)
        if cofactor != 0:
            return -_sign(cofactor) * _sign(query_cofactor)
    return 0
