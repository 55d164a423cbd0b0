"""Unit tests for the maximal net sampler and genericity jitter."""

from __future__ import annotations

import numpy as np
import pytest

from src.core.errors import SeparationError, UsageError
from src.core.hyperbolic import hdist
from src.core.sampling import (
    genericity_jitter,
    packing_bound,
    probe_spacing,
    sample_maximal_net,
    verify_covering,
    verify_separation,
)
from src.models.point_set import PatchDomain, PointSet


def test_net_is_separated(small_net: PointSet) -> None:
    audit = verify_separation(small_net)
    assert audit.passed
    assert audit.pair is None


def test_net_covers_the_shrunk_domain(small_net: PointSet) -> None:
    audit = verify_covering(small_net)
    assert audit.passed
    assert audit.probes > 0
    assert 0.0 < audit.worst_distance <= small_net.epsilon


def test_net_stays_in_the_domain(small_net: PointSet, small_domain: PatchDomain) -> None:
    assert np.all(small_domain.contains(small_net.points))
    assert len(small_net) <= packing_bound(2, small_domain.radius, small_net.epsilon)


def test_sampling_is_deterministic() -> None:
    domain = PatchDomain.centered(2, 0.5, 0.3)
    first = sample_maximal_net(domain, 0.1, seed=11)
    second = sample_maximal_net(domain, 0.1, seed=11)
    assert np.array_equal(first.points, second.points)


def test_sampling_off_center_domain() -> None:
    shifted = PatchDomain(
        center={"coords": [np.cosh(0.7), np.sinh(0.7), 0.0]}, radius=0.6, margin=0.2
    )
    net = sample_maximal_net(shifted, 0.1, seed=2)
    assert np.all(shifted.contains(net.points))
    assert verify_separation(net).passed
    assert verify_covering(net).passed


def test_large_epsilon_returns_the_center() -> None:
    domain = PatchDomain.centered(3, 0.4, 0.1)
    net = sample_maximal_net(domain, 1.0, seed=0)
    assert len(net) == 1
    assert np.allclose(net.points[0], domain.center.coords)


def test_epsilon_must_be_positive(small_domain: PatchDomain) -> None:
    with pytest.raises(UsageError):
        sample_maximal_net(small_domain, 0.0, seed=0)


def test_probe_spacing_shrinks_with_radius() -> None:
    assert probe_spacing(2.0, 0.1) < probe_spacing(0.5, 0.1)
    assert probe_spacing(0.5, 0.1, factor=0.2) == pytest.approx(2 * probe_spacing(0.5, 0.1, 0.1))


def test_separation_audit_finds_close_pair() -> None:
    points = np.array([[1.0, 0.0, 0.0], [np.cosh(0.05), np.sinh(0.05), 0.0]])
    audit = verify_separation(PointSet(epsilon=0.1, seed=0, points=points))
    assert not audit.passed
    assert audit.pair == (0, 1)
    assert audit.min_distance == pytest.approx(0.05)


def test_covering_needs_a_domain() -> None:
    ps = PointSet(epsilon=0.1, seed=0, points=[[1.0, 0.0, 0.0]])
    with pytest.raises(UsageError):
        verify_covering(ps)


def test_jitter_is_bounded_and_keeps_separation(small_net: PointSet) -> None:
    magnitude = small_net.epsilon / 10.0 / 1000.0
    moved = genericity_jitter(small_net, magnitude, seed=3)
    shifts = hdist(small_net.points, moved.points)
    assert np.all(shifts <= magnitude * (1.0 + 1e-6))
    assert np.any(shifts > 0.0)
    assert verify_separation(moved).passed
    assert moved.mu == small_net.mu
    again = genericity_jitter(small_net, magnitude, seed=3)
    assert np.array_equal(moved.points, again.points)


def test_zero_jitter_is_identity(small_net: PointSet) -> None:
    assert np.array_equal(genericity_jitter(small_net, 0.0, seed=1).points, small_net.points)


@pytest.mark.parametrize("magnitude", [-1e-9, 1e-3])
def test_jitter_magnitude_out_of_range(small_net: PointSet, magnitude: float) -> None:
    with pytest.raises(UsageError):
        genericity_jitter(small_net, magnitude, seed=0)


def test_anchors_lead_the_net() -> None:
    shifted = PatchDomain(
        center={"coords": [np.cosh(0.7), np.sinh(0.7), 0.0]}, radius=0.6, margin=0.2
    )
    anchors = np.vstack(
        [shifted.center.coords, [np.cosh(0.85), np.sinh(0.85), 0.0]]
    )
    net = sample_maximal_net(shifted, 0.1, seed=2, anchors=anchors)
    assert np.allclose(net.points[:2], anchors, atol=1e-12)
    assert verify_separation(net).passed
    assert verify_covering(net).passed


def test_anchors_must_be_separated_and_inside(small_domain: PatchDomain) -> None:
    close = np.array([[1.0, 0.0, 0.0], [np.cosh(0.05), np.sinh(0.05), 0.0]])
    with pytest.raises(SeparationError):
        sample_maximal_net(small_domain, 0.1, seed=0, anchors=close)
    far = np.array([[np.cosh(2.0), np.sinh(2.0), 0.0]])
    with pytest.raises(UsageError):
        sample_maximal_net(small_domain, 0.1, seed=0, anchors=far)
