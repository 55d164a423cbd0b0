"""Maximal epsilon-separated nets of a geodesic ball and their genericity jitter.

Sampling happens in a frame where the domain is centered at the basepoint,
so the ball is the Euclidean ball of radius tanh(R/2) in Poincare
coordinates. Since the Poincare metric is at least twice the Euclidean one,
two points closer than epsilon hyperbolically are closer than epsilon/2 in
Poincare coordinates; the spatial hash and KD-tree queries rely on that.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from itertools import product
from typing import Iterator, NamedTuple, Optional

import numpy as np
from scipy.spatial import cKDTree

from src.models.point_set import PatchDomain, PointSet

from .config import settings
from .errors import SeparationError, UsageError
from .hyperbolic import (
    ball_volume,
    boost_from_origin,
    boost_to_origin,
    exp_map,
    from_poincare,
    hdist,
    minkowski_dot,
    sample_ball,
    tangent_norm,
    to_poincare,
)
from .telemetry import annotate_span, trace_operation

logger = logging.getLogger(__name__)

_PROBE_CHUNK = 200_000
_COVER_NEIGHBORS = 8


class SeparationAudit(NamedTuple):
    min_distance: float
    pair: Optional[tuple[int, int]]
    passed: bool


class CoverageAudit(NamedTuple):
    probes: int
    worst_distance: float
    worst_probe: Optional[np.ndarray]
    passed: bool


class _SpatialHash:
    """Accepted samples bucketed on a Euclidean grid of Poincare coordinates."""

    def __init__(self, epsilon: float, n: int) -> None:
        self.epsilon = epsilon
        self.cell = epsilon / 2.0
        self.offsets = list(product((-1, 0, 1), repeat=n))
        self.buckets: dict[tuple[int, ...], list[int]] = defaultdict(list)
        self.points: list[np.ndarray] = []

    def _key(self, x: np.ndarray) -> tuple[int, ...]:
        return tuple(int(v) for v in np.floor(x / self.cell))

    def is_free(self, point: np.ndarray, x: np.ndarray) -> bool:
        """No accepted sample within epsilon of `point`."""
        key = self._key(x)
        nearby = [
            index
            for offset in self.offsets
            for index in self.buckets.get(tuple(k + o for k, o in zip(key, offset)), ())
        ]
        if not nearby:
            return True
        distances = np.atleast_1d(hdist(np.asarray([self.points[i] for i in nearby]), point))
        return bool(np.all(distances >= self.epsilon))

    def insert(self, point: np.ndarray, x: np.ndarray) -> None:
        self.buckets[self._key(x)].append(len(self.points))
        self.points.append(point)

    def offer(self, point: np.ndarray, x: np.ndarray) -> bool:
        if self.is_free(point, x):
            self.insert(point, x)
            return True
        return False


def _probe_chunks(rho: float, spacing: float, n: int) -> Iterator[np.ndarray]:
    """Euclidean grid points of the ball |x| <= rho, in slabs along the first axis."""
    steps = int(math.floor(rho / spacing))
    axis = spacing * np.arange(-steps, steps + 1)
    tail = np.stack(np.meshgrid(*([axis] * (n - 1)), indexing="ij"), axis=-1).reshape(
        -1, n - 1
    )
    tail = tail[np.sum(tail**2, axis=1) <= rho * rho]
    buffered: list[np.ndarray] = []
    size = 0
    for first in axis:
        remaining = rho * rho - first * first
        if remaining < 0.0:
            continue
        rows = tail[np.sum(tail**2, axis=1) <= remaining]
        slab = np.hstack([np.full((rows.shape[0], 1), first), rows])
        buffered.append(slab)
        size += slab.shape[0]
        if size >= _PROBE_CHUNK:
            yield np.vstack(buffered)
            buffered, size = [], 0
    if buffered:
        yield np.vstack(buffered)


def probe_spacing(radius: float, epsilon: float, factor: Optional[float] = None) -> float:
    """Euclidean probe spacing giving hyperbolic spacing <= factor * epsilon in B(radius)."""
    factor = settings.probe_spacing_factor if factor is None else factor
    rho = math.tanh(radius / 2.0)
    stretch = 2.0 / (1.0 - rho * rho)
    return factor * epsilon / stretch


def packing_bound(n: int, radius: float, epsilon: float) -> int:
    """Largest possible size of an epsilon-separated set in B(radius)."""
    return int(
        math.floor(ball_volume(n, radius + epsilon / 2.0) / ball_volume(n, epsilon / 2.0))
    )


def _maybe_uncovered(
    tree: Optional[cKDTree], points: np.ndarray, probes: np.ndarray, epsilon: float
) -> np.ndarray:
    """Probes with no sample provably within epsilon among the nearest tree points."""
    if tree is None:
        return np.ones(probes.shape[0], dtype=bool)
    k = min(4, points.shape[0])
    distances, indices = tree.query(probes, k=k, distance_upper_bound=epsilon / 2.0)
    distances = distances.reshape(probes.shape[0], k)
    indices = indices.reshape(probes.shape[0], k)
    found = np.isfinite(distances)
    covered = np.zeros(probes.shape[0], dtype=bool)
    if np.any(found):
        rows, cols = np.nonzero(found)
        exact = hdist(points[indices[rows, cols]], from_poincare(probes[rows]))
        hit = np.atleast_1d(exact) < epsilon
        covered[rows[hit]] = True
    return ~covered


def _offer_anchors(
    grid: _SpatialHash, domain: PatchDomain, epsilon: float, anchors: Optional[np.ndarray]
) -> int:
    """Insert fixed points into the hash in the domain-centered frame."""
    if anchors is None:
        return 0
    world = np.atleast_2d(np.asarray(anchors, dtype=float))
    if world.shape[1] != domain.n + 1:
        raise UsageError(f"anchors must be (M, {domain.n + 1}) hyperboloid coordinates")
    if not np.all(domain.contains(world)):
        raise UsageError("anchors must lie in the sampling domain")
    local = boost_to_origin(domain.center.coords, world)
    for index, (point, x) in enumerate(zip(local, to_poincare(local))):
        if not grid.offer(point, x):
            raise SeparationError(
                f"anchor {index} is closer than {epsilon:g} to another anchor"
            )
    return int(world.shape[0])


@trace_operation("sampler", "sample_maximal_net")
def sample_maximal_net(
    domain: PatchDomain,
    epsilon: float,
    seed: int,
    spacing_factor: Optional[float] = None,
    anchors: Optional[np.ndarray] = None,
) -> PointSet:
    """
    Maximal epsilon-separated set of the domain ball.

    Dart throwing (a uniform stream accepted greedily) is followed by greedy
    insertion at every probe of a grid with hyperbolic spacing
    spacing_factor * epsilon that no accepted ball covers. Deterministic for
    a given seed. `anchors` are kept as the first points of the net and the
    rest is filled around them; they must lie in the domain and be
    epsilon-separated.
    """
    n = domain.n
    if epsilon <= 0.0:
        raise UsageError("epsilon must be positive")
    if epsilon >= 2.0 * domain.radius:
        logger.info("epsilon >= 2 * radius: the net is the domain center")
        center = domain.center.coords[None, :]
        return PointSet(n=n, epsilon=epsilon, seed=seed, points=center, domain=domain)
    if epsilon >= domain.radius / 10.0:
        logger.warning(
            "⚠️ epsilon %.4g is not below radius/10 = %.4g; the net is coarse",
            epsilon,
            domain.radius / 10.0,
        )

    rng = np.random.default_rng(seed)
    origin = np.zeros(n + 1)
    origin[0] = 1.0
    grid = _SpatialHash(epsilon, n)
    kept = _offer_anchors(grid, domain, epsilon, anchors)

    bound = packing_bound(n, domain.radius, epsilon)
    budget = int(math.ceil(settings.dart_oversampling * bound))
    darts = sample_ball(origin, domain.radius, budget, rng)
    dart_coords = to_poincare(darts)
    for point, x in zip(darts, dart_coords):
        grid.offer(point, x)
    from_darts = len(grid.points) - kept
    logger.debug("dart throwing accepted %d of %d darts", from_darts, darts.shape[0])

    accepted = np.asarray(grid.points)
    tree = cKDTree(to_poincare(accepted)) if accepted.size else None
    rho = math.tanh(domain.radius / 2.0)
    spacing = probe_spacing(domain.radius, epsilon, spacing_factor)
    probes_seen = 0
    for chunk in _probe_chunks(rho, spacing, n):
        probes_seen += chunk.shape[0]
        for x in chunk[_maybe_uncovered(tree, accepted, chunk, epsilon)]:
            grid.offer(from_poincare(x), x)

    local = np.asarray(grid.points)
    points = boost_from_origin(domain.center.coords, local)
    annotate_span(
        points=len(points), anchors=kept, darts_accepted=from_darts, probes=probes_seen
    )
    logger.info(
        "✅ sampled %d points (%d anchors, %d from darts, %d from %d probes)",
        len(points),
        kept,
        from_darts,
        len(points) - kept - from_darts,
        probes_seen,
    )
    return PointSet(n=n, epsilon=epsilon, seed=seed, points=points, domain=domain)


def _close_pairs(points: np.ndarray, epsilon: float) -> list[tuple[int, int, float]]:
    if points.shape[0] < 2:
        return []
    tree = cKDTree(to_poincare(points))
    pairs = tree.query_pairs(epsilon / 2.0, output_type="ndarray")
    if pairs.size == 0:
        return []
    distances = np.atleast_1d(hdist(points[pairs[:, 0]], points[pairs[:, 1]]))
    close = distances < epsilon
    return [
        (int(i), int(j), float(dist))
        for (i, j), dist in zip(pairs[close], distances[close])
    ]


def verify_separation(ps: PointSet, epsilon: Optional[float] = None) -> SeparationAudit:
    """Closest pair below epsilon, if any; passes within representation tolerance."""
    eps = ps.epsilon if epsilon is None else epsilon
    close = _close_pairs(ps.points, eps)
    if not close:
        return SeparationAudit(min_distance=math.inf, pair=None, passed=True)
    i, j, distance = min(close, key=lambda item: item[2])
    passed = distance >= eps - settings.representation_tolerance
    return SeparationAudit(min_distance=distance, pair=(i, j), passed=passed)


def verify_covering(
    ps: PointSet,
    domain: Optional[PatchDomain] = None,
    epsilon: Optional[float] = None,
    spacing_factor: Optional[float] = None,
) -> CoverageAudit:
    """Largest probe-to-net distance over the shrunk domain (an upper estimate)."""
    domain = domain if domain is not None else ps.domain
    if domain is None:
        raise UsageError("covering is verified against a domain")
    eps = ps.epsilon if epsilon is None else epsilon
    local = boost_to_origin(domain.center.coords, ps.points)
    coords = to_poincare(local)
    tree = cKDTree(coords)
    k = min(_COVER_NEIGHBORS, local.shape[0])
    rho = math.tanh(domain.shrunk_radius / 2.0)
    spacing = probe_spacing(domain.radius, eps, spacing_factor)
    worst, worst_probe, total = 0.0, None, 0
    for chunk in _probe_chunks(rho, spacing, domain.n):
        total += chunk.shape[0]
        distances, indices = tree.query(chunk, k=k)
        indices = indices.reshape(chunk.shape[0], k)
        probes = from_poincare(chunk)
        exact = hdist(local[indices], probes[:, None, :])
        nearest = np.min(np.atleast_2d(exact), axis=1)
        index = int(np.argmax(nearest))
        if nearest[index] > worst:
            worst = float(nearest[index])
            worst_probe = boost_from_origin(domain.center.coords, probes[index])
    return CoverageAudit(
        probes=total, worst_distance=worst, worst_probe=worst_probe, passed=worst <= eps
    )


def _random_tangents(
    points: np.ndarray, radii: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    raw = rng.standard_normal(points.shape)
    tangent = raw + np.asarray(minkowski_dot(raw, points))[..., None] * points
    norms = tangent_norm(tangent)
    return tangent * (radii / norms)[..., None]


@trace_operation("sampler", "genericity_jitter")
def genericity_jitter(ps: PointSet, magnitude: float, seed: int) -> PointSet:
    """
    Displace every point by at most `magnitude` in a uniformly random direction.

    Points that end up closer than epsilon to another are redrawn from their
    original positions with a fresh stream, up to jitter_max_retries times.
    """
    delta = ps.epsilon / 10.0
    if magnitude < 0.0 or magnitude > delta / 1000.0:
        raise UsageError(f"jitter magnitude must be in [0, {delta / 1000.0:.3e}]")
    if magnitude == 0.0:
        return ps.with_points(ps.points.copy())

    n = ps.dimension
    original = ps.points
    moved = original.copy()
    pending = np.arange(len(ps))
    for attempt in range(settings.jitter_max_retries + 1):
        rng = np.random.default_rng([seed, attempt])
        base = original[pending]
        radii = magnitude * rng.random(pending.shape[0]) ** (1.0 / n)
        moved[pending] = exp_map(base, _random_tangents(base, radii, rng))
        close = _close_pairs(moved, ps.epsilon - settings.representation_tolerance)
        if not close:
            logger.debug("jitter settled after %d redraws", attempt)
            return ps.with_points(moved)
        pending = np.unique([index for i, j, _ in close for index in (i, j)])
        moved[pending] = original[pending]
    raise SeparationError(
        f"jitter kept breaking separation for {pending.shape[0]} points "
        f"after {settings.jitter_max_retries} retries"
    )
