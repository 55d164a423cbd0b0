"""Unit tests for the hyperboloid-model kernel."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from src.core.errors import DegeneracyError, UnboundedCircumsphereError, UsageError
from src.core.hyperbolic import (
    angle_at_vertex,
    annulus_volume,
    ball_volume,
    boost_from_origin,
    boost_to_origin,
    circumsphere,
    circumspheres,
    dist_to_hyperplane,
    dist_to_sphere,
    dist_to_subsphere,
    exp_map,
    from_klein,
    from_poincare,
    geodesic_point,
    geodesic_span,
    hdist,
    hyperplane_angle,
    hyperplane_span,
    log_map,
    minkowski_dot,
    normalize,
    project_to_hyperplane,
    restrict_to_span,
    sample_ball,
    shell_volume,
    sphere_volume,
    to_klein,
    to_poincare,
)
from src.models.geometry import HPoint
from tests.fixtures.simplices import basepoint, point_at, regular_tetrahedron, regular_triangle


def test_minkowski_dot_rejects_dimension_mismatch() -> None:
    with pytest.raises(UsageError):
        minkowski_dot(np.zeros(3), np.zeros(4))


def test_normalize_lands_on_upper_sheet() -> None:
    x = normalize(np.array([-3.0, 0.5, 1.0]))
    assert x[0] > 0.0
    assert minkowski_dot(x, x) == pytest.approx(-1.0, abs=1e-12)


def test_normalize_rejects_spacelike_vector() -> None:
    with pytest.raises(UsageError):
        normalize(np.array([0.1, 1.0, 0.0]))


def test_hdist_matches_radial_distance() -> None:
    assert hdist(basepoint(2), point_at([0.3, 0.4], 1.7)) == pytest.approx(1.7, rel=1e-12)
    p = point_at([1.0, 2.0, -1.0], 0.4)
    assert hdist(p, p) == 0.0


def test_hdist_accepts_hpoint_models() -> None:
    origin = HPoint.origin(2)
    other = HPoint(coords=point_at([1.0, 0.0], 0.25))
    assert hdist(origin, other) == pytest.approx(0.25, rel=1e-12)


def test_hdist_broadcasts_over_batches() -> None:
    points = np.vstack([point_at([1.0, 0.0], r) for r in (0.1, 0.2, 0.3)])
    assert np.allclose(hdist(points, basepoint(2)), [0.1, 0.2, 0.3], rtol=1e-12)


def test_geodesic_point_divides_distance() -> None:
    x = point_at([1.0, 0.0], 0.5)
    y = point_at([0.0, 1.0], 1.5)
    total = hdist(x, y)
    mid = geodesic_point(x, y, 0.3)
    assert hdist(x, mid) == pytest.approx(0.3 * total, rel=1e-10)
    assert hdist(mid, y) == pytest.approx(0.7 * total, rel=1e-10)


def test_exp_and_log_are_inverse() -> None:
    p = point_at([0.2, -0.5, 1.0], 0.8)
    q = point_at([-1.0, 0.3, 0.1], 1.1)
    v = log_map(p, q)
    assert minkowski_dot(v, p) == pytest.approx(0.0, abs=1e-12)
    assert math.sqrt(minkowski_dot(v, v)) == pytest.approx(hdist(p, q), rel=1e-10)
    assert np.allclose(exp_map(p, v), q, atol=1e-10)


def test_boosts_are_isometries() -> None:
    p = point_at([1.0, 1.0], 0.9)
    x = point_at([0.0, 1.0], 0.4)
    y = point_at([-1.0, 0.2], 1.3)
    assert np.allclose(boost_to_origin(p, p), basepoint(2), atol=1e-12)
    assert np.allclose(boost_from_origin(p, basepoint(2)), p, atol=1e-12)
    moved = boost_to_origin(p, np.vstack([x, y]))
    assert hdist(moved[0], moved[1]) == pytest.approx(hdist(x, y), rel=1e-10)


def test_ball_models_round_trip() -> None:
    p = point_at([0.3, -0.2, 0.9], 2.0)
    assert np.allclose(from_poincare(to_poincare(p)), p, rtol=1e-12)
    assert np.allclose(from_klein(to_klein(p)), p, rtol=1e-12)
    radius = np.linalg.norm(to_poincare(p))
    assert radius == pytest.approx(math.tanh(1.0), rel=1e-12)


def test_ball_models_reject_points_outside_the_unit_ball() -> None:
    with pytest.raises(UsageError):
        from_poincare([0.8, 0.6])
    with pytest.raises(UsageError):
        from_klein([1.0, 0.0])


def test_law_of_cosines() -> None:
    b, c, angle = 0.7, 1.2, 1.1
    apex = basepoint(2)
    p = point_at([1.0, 0.0], b)
    q = point_at([math.cos(angle), math.sin(angle)], c)
    expected = math.acosh(
        math.cosh(b) * math.cosh(c) - math.sinh(b) * math.sinh(c) * math.cos(angle)
    )
    assert hdist(p, q) == pytest.approx(expected, rel=1e-10)
    assert angle_at_vertex(apex, p, q) == pytest.approx(angle, rel=1e-10)


def test_law_of_sines() -> None:
    tri = regular_triangle(0.6)
    tri[2] = point_at([-0.2, -1.0], 0.9)
    sides = [hdist(tri[1], tri[2]), hdist(tri[0], tri[2]), hdist(tri[0], tri[1])]
    angles = [
        angle_at_vertex(tri[0], tri[1], tri[2]),
        angle_at_vertex(tri[1], tri[0], tri[2]),
        angle_at_vertex(tri[2], tri[0], tri[1]),
    ]
    ratios = [math.sinh(s) / math.sin(t) for s, t in zip(sides, angles)]
    assert ratios[0] == pytest.approx(ratios[1], rel=1e-9)
    assert ratios[1] == pytest.approx(ratios[2], rel=1e-9)


def test_angle_at_coincident_vertex_is_degenerate() -> None:
    p = point_at([1.0, 0.0], 0.3)
    with pytest.raises(DegeneracyError):
        angle_at_vertex(p, p, basepoint(2))


def test_circumsphere_of_regular_triangle() -> None:
    sphere = circumsphere(regular_triangle(0.4))
    assert sphere.radius == pytest.approx(0.4, rel=1e-10)
    assert hdist(sphere.center, basepoint(2)) == pytest.approx(0.0, abs=1e-8)


def test_circumsphere_of_tetrahedron_is_equidistant() -> None:
    tet = regular_tetrahedron(0.3)
    tet[0] = point_at([1.0, 0.8, 1.2], 0.35)
    sphere = circumsphere(tet)
    distances = hdist(tet, sphere.center)
    assert np.allclose(distances, sphere.radius, rtol=1e-9)


def test_circumsphere_unbounded_on_hypercycle() -> None:
    # three points on a hypercycle at distance 0.5 from a geodesic
    s = 0.5
    tri = np.array(
        [[math.cosh(s) * math.cosh(t), math.cosh(s) * math.sinh(t), math.sinh(s)] for t in (-1.0, 0.0, 1.0)]
    )
    with pytest.raises(UnboundedCircumsphereError):
        circumsphere(tri)


def test_batched_circumspheres_match_scalar() -> None:
    tris = np.stack([regular_triangle(r) for r in (0.1, 0.5, 1.0)])
    centers, radii = circumspheres(tris)
    assert np.allclose(radii, [0.1, 0.5, 1.0], rtol=1e-9)
    assert np.all(np.isfinite(centers))


def test_geodesic_span_and_restriction() -> None:
    tri = np.vstack(
        [point_at([1.0, 0.0, 0.0], 0.4), point_at([0.0, 1.0, 0.0], 0.5), point_at([1.0, 1.0, 0.0], 0.9)]
    )
    frame = geodesic_span(tri)
    assert frame.shape == (3, 4)
    coords, restricted_frame = restrict_to_span(tri)
    assert coords.shape == (3, 3)
    assert np.allclose(coords @ restricted_frame, tri, atol=1e-10)
    assert hdist(coords[0], coords[2]) == pytest.approx(hdist(tri[0], tri[2]), rel=1e-9)


def test_geodesic_span_rejects_dependent_points() -> None:
    p = point_at([1.0, 0.0], 0.3)
    with pytest.raises(DegeneracyError):
        geodesic_span(np.vstack([p, p]))


def test_hyperplane_distance_and_projection() -> None:
    line = hyperplane_span(np.vstack([basepoint(2), point_at([1.0, 0.0], 1.0)]))
    p = point_at([0.0, 1.0], 0.7)
    assert dist_to_hyperplane(p, line) == pytest.approx(0.7, rel=1e-10)
    foot = project_to_hyperplane(p, line)
    assert dist_to_hyperplane(foot, line) == pytest.approx(0.0, abs=1e-12)
    assert hdist(p, foot) == pytest.approx(0.7, rel=1e-10)


def test_hyperplane_angle_of_perpendicular_lines() -> None:
    first = hyperplane_span(np.vstack([basepoint(2), point_at([1.0, 0.0], 1.0)]))
    second = hyperplane_span(np.vstack([basepoint(2), point_at([0.0, 1.0], 1.0)]))
    assert hyperplane_angle(first, second) == pytest.approx(math.pi / 2.0, abs=1e-12)


def test_distance_to_spheres() -> None:
    sphere = circumsphere(regular_triangle(0.5))
    assert dist_to_sphere(basepoint(2), sphere) == pytest.approx(0.5, rel=1e-6)
    edge = np.vstack([point_at([1.0, 0.0, 0.0], 0.3), point_at([-1.0, 0.0, 0.0], 0.3)])
    # the circumsphere of an edge is its endpoint pair; the basepoint is its center
    assert dist_to_subsphere(basepoint(3), edge) == pytest.approx(0.3, rel=1e-8)


@pytest.mark.parametrize("r", [1e-6, 0.01, 0.5, 2.0, 5.0])
def test_ball_volume_closed_forms_match_quadrature(r: float) -> None:
    for n in (2, 3, 4):
        area = 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
        radial, _ = integrate.quad(lambda t: math.sinh(t) ** (n - 1), 0.0, r, epsrel=1e-13)
        assert ball_volume(n, r) == pytest.approx(area * radial, rel=1e-9)
    if r >= 0.01:
        assert ball_volume(2, r) == pytest.approx(2.0 * math.pi * (math.cosh(r) - 1.0), rel=1e-9)
        assert ball_volume(3, r) == pytest.approx(
            math.pi * (math.sinh(2.0 * r) - 2.0 * r), rel=1e-9
        )


def test_ball_volume_rejects_bad_arguments() -> None:
    with pytest.raises(UsageError):
        ball_volume(1, 1.0)
    with pytest.raises(UsageError):
        ball_volume(2, -1.0)
    assert ball_volume(3, 0.0) == 0.0


def test_shell_volume_is_a_difference_of_balls() -> None:
    for n in (2, 3, 5):
        assert shell_volume(n, 0.4, 1.3) == pytest.approx(
            ball_volume(n, 1.3) - ball_volume(n, 0.4), rel=1e-9
        )
    assert shell_volume(3, 0.7, 0.7) == 0.0
    with pytest.raises(UsageError):
        shell_volume(2, 1.0, 0.5)


def test_thin_shell_is_stable() -> None:
    gap = 2.0**-40
    thin = shell_volume(3, 1.0, 1.0 + gap)
    assert thin == pytest.approx(sphere_volume(3, 1.0) * gap, rel=1e-6)


def test_annulus_volume() -> None:
    assert annulus_volume(2, 1.0, 0.0) == 0.0
    assert annulus_volume(3, 0.5, 0.2) == pytest.approx(shell_volume(3, 0.3, 0.7), rel=1e-12)
    assert annulus_volume(2, 0.1, 0.3) == pytest.approx(ball_volume(2, 0.4), rel=1e-12)
    tiny = annulus_volume(4, 0.1, 1e-12)
    assert tiny == pytest.approx(sphere_volume(4, 0.1) * 2e-12, rel=1e-5)


def test_sample_ball_stays_inside_and_is_seeded() -> None:
    center = point_at([1.0, -1.0, 0.5], 0.8)
    first = sample_ball(center, 0.3, 500, np.random.default_rng(3))
    second = sample_ball(center, 0.3, 500, np.random.default_rng(3))
    assert np.array_equal(first, second)
    assert np.all(hdist(first, center) <= 0.3 + 1e-12)
    assert np.allclose(minkowski_dot(first, first), -1.0, atol=1e-12)


def test_sample_ball_radial_law_in_the_plane() -> None:
    # P(d <= r/2) = V(r/2) / V(r) for a uniform sample
    radius = 2.0
    samples = sample_ball(basepoint(2), radius, 20_000, np.random.default_rng(11))
    fraction = float(np.mean(hdist(samples, basepoint(2)) <= radius / 2.0))
    expected = ball_volume(2, radius / 2.0) / ball_volume(2, radius)
    assert fraction == pytest.approx(expected, abs=0.02)
