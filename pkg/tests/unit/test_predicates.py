"""Unit tests for the robust orientation and in-sphere predicates."""

from __future__ import annotations

import numpy as np

from src.core.predicates import insphere, insphere_exact, insphere_filter, orient

UNIT_TRIANGLE = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


def test_orient_signs() -> None:
    assert orient(UNIT_TRIANGLE) == 1
    assert orient(UNIT_TRIANGLE[::-1]) == -1
    assert orient(np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])) == 0


def test_orient_exact_on_nearly_collinear_points() -> None:
    # representable doubles on a line; the filter cannot decide
    points = np.array([[0.5, 0.5], [12.0, 12.0], [24.0, 24.0]])
    assert orient(points) == 0
    nudged = points.copy()
    nudged[2, 1] = np.nextafter(24.0, 25.0)
    assert orient(nudged) == 1


def test_orient_in_three_dimensions() -> None:
    tet = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    assert orient(tet) == 1
    assert orient(tet[[1, 0, 2, 3]]) == -1


def test_insphere_inside_and_outside() -> None:
    assert insphere(UNIT_TRIANGLE, np.array([0.25, 0.25])) == 1
    assert insphere(UNIT_TRIANGLE, np.array([2.0, 2.0])) == -1
    # orientation of the input does not matter
    assert insphere(UNIT_TRIANGLE[::-1], np.array([0.25, 0.25])) == 1


def test_insphere_filter_defers_cocircular_query() -> None:
    square_corner = np.array([1.0, 1.0])
    sign, certain = insphere_filter(UNIT_TRIANGLE, square_corner)
    assert not certain or sign == 0
    assert insphere_exact(UNIT_TRIANGLE, square_corner) == 0


def test_insphere_symbolic_tie_break_is_consistent() -> None:
    square = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    first = insphere(square[[0, 1, 2]], square[3], indices=(0, 1, 2), query_index=3)
    second = insphere(square[[0, 1, 3]], square[2], indices=(0, 1, 3), query_index=2)
    assert first != 0
    assert second != 0
    # exactly one diagonal wins
    assert first == -second


def test_insphere_without_indices_reports_ties() -> None:
    square = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    assert insphere(square[:3], square[3]) == 0
