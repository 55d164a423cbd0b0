"""Dimension-by-dimension sliver removal by vertex perturbation.

Stage k moves every interior vertex once, in ascending id order, to a
uniformly drawn position within delta_{k+1} of where it is, rejecting
positions that make any nearby simplex of dimension <= k+1 thin. A position
is rejected when some candidate simplex [position, tuple] has every edge in
[a, b], circumradius <= c and an altitude below the stage target.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import NamedTuple, Optional, Union

import numpy as np
from scipy.spatial import cKDTree

from src.models.perturbation import PerturbationMode, StageReport
from src.models.point_set import PointSet
from src.models.quality import QualityParams

from .bounds import h0_bound, n_count, quality_params
from .config import settings
from .delaunay import SimplexComplex, build_delaunay
from .errors import PerturbationError, StageAuditError, UsageError
from .hyperbolic import excess_matrix, hdist, pairwise_distances, sample_ball, to_poincare
from .quality import good_mask, metrics_from_excess, simplex_metrics, window_mask
from .telemetry import annotate_span, trace_operation

logger = logging.getLogger(__name__)

Tuple = tuple[int, ...]

# keeps sampled positions strictly inside the relocation bound
_RADIUS_SHRINK = 1.0 - 1e-9
_EXCESS_BUDGET = 4_000_000


@dataclass
class StageState:
    """
    Perturbation state entering stage k.

    All simplices of dimension <= k with interior vertices are
    (a, b, achieved[k])-good; `origin` holds the unperturbed net.
    """

    k: int
    complex: SimplexComplex
    params: QualityParams
    seed: int
    mode: PerturbationMode
    achieved: dict[int, float]
    origin: np.ndarray
    processed: list[int] = field(default_factory=list)
    reports: list[StageReport] = field(default_factory=list)
    _tree: Optional[cKDTree] = field(default=None, repr=False)

    @property
    def delta_next(self) -> float:
        return self.params.delta_k[self.k + 1]

    def stage_tree(self) -> cKDTree:
        """KD-tree of Poincare coordinates frozen at the start of the stage."""
        if self._tree is None:
            self._tree = cKDTree(to_poincare(self.complex.points))
        return self._tree


class _CandidateGroup(NamedTuple):
    """Candidate tuples of one size with their facet excess matrices."""

    tuples: np.ndarray
    facets: np.ndarray
    excess: np.ndarray


def candidate_simplices(vertex_id: int, state: StageState) -> list[Tuple]:
    """
    Vertex tuples of size 1..k+1 that may span a simplex with the vertex.

    Members lie within 2 eps + 2 delta + 2 delta_{k+1} of the vertex and
    have pairwise distances in [a - 2 delta_{k+1}, b + 2 delta_{k+1}].
    """
    params = state.params
    slack = 2.0 * state.delta_next
    reach = 2.0 * params.epsilon + 2.0 * params.delta + slack
    points = state.complex.points
    center = points[vertex_id]
    # positions drift by at most delta_{k+1} during the stage
    nearby = state.stage_tree().query_ball_point(
        to_poincare(center), (reach + slack) / 2.0
    )
    nearby = np.asarray(sorted(i for i in nearby if i != vertex_id), dtype=int)
    if nearby.size == 0:
        return []
    distances = np.atleast_1d(hdist(points[nearby], center))
    nearby = nearby[distances <= reach]
    if nearby.size == 0:
        return []

    pairwise = pairwise_distances(points[nearby])
    adjacent = (pairwise >= params.a - slack) & (pairwise <= params.b + slack)
    np.fill_diagonal(adjacent, False)

    found: list[Tuple] = []
    level = [(int(i),) for i in range(nearby.size)]
    for _ in range(state.k + 1):
        found.extend(tuple(int(nearby[i]) for i in t) for t in level)
        extended = []
        for t in level:
            common = np.logical_and.reduce(adjacent[list(t)], axis=0)
            common[: t[-1] + 1] = False
            extended.extend(t + (int(j),) for j in np.flatnonzero(common))
        level = extended
        if not level:
            break
    return found


def candidate_bound(state: StageState) -> int:
    params = state.params
    return sum(
        n_count(params.n, size, params.mu, params.epsilon, params.delta)
        for size in range(1, state.k + 2)
    )


def _group_candidates(
    candidates: list[Tuple], points: np.ndarray, params: QualityParams
) -> list[_CandidateGroup]:
    """Group by size, dropping tuples that cannot be a face of an admissible simplex."""
    by_size: dict[int, list[Tuple]] = {}
    for t in candidates:
        by_size.setdefault(len(t), []).append(t)
    groups = []
    for size in sorted(by_size):
        tuples = np.asarray(by_size[size], dtype=int)
        facets = points[tuples]
        excess = excess_matrix(facets)
        if size >= 2:
            metrics = metrics_from_excess(excess)
            keep = window_mask(metrics, params.a, params.b, params.c)
            tuples, facets, excess = tuples[keep], facets[keep], excess[keep]
        if tuples.shape[0]:
            groups.append(_CandidateGroup(tuples, facets, excess))
    return groups


def _rejected(
    trials: np.ndarray, groups: list[_CandidateGroup], params: QualityParams, d: float
) -> np.ndarray:
    """
    Mask of trial positions that would create an admissible simplex thinner than d.

    Every altitude of [position, tuple] is tested, not only the altitude of
    the moving vertex, so the accepted set is contained in the complement of
    the vertex's bad region and matches the end-of-stage audit.
    """
    bad = np.zeros(trials.shape[0], dtype=bool)
    for group in groups:
        count, size = group.tuples.shape
        if size < 2:
            continue
        diff = trials[:, None, None, :] - group.facets[None, :, :, :]
        form = -diff[..., 0] ** 2 + np.sum(diff[..., 1:] ** 2, axis=-1)
        border = np.maximum(form, 0.0) / 2.0
        excess = np.zeros((trials.shape[0], count, size + 1, size + 1))
        excess[:, :, 1:, 1:] = group.excess[None]
        excess[:, :, 0, 1:] = border
        excess[:, :, 1:, 0] = border
        metrics = metrics_from_excess(excess)
        in_window = window_mask(metrics, params.a, params.b, params.c)
        thin = np.any(metrics.altitudes < d, axis=-1)
        bad |= np.any(in_window & thin, axis=1)
    return bad


def _rejection_search(
    vertex_id: int,
    groups: list[_CandidateGroup],
    delta_next: float,
    d: float,
    state: StageState,
    max_trials: int,
    attempt: int,
) -> tuple[Optional[np.ndarray], int]:
    """First admissible draw within delta_next, or None once max_trials are spent."""
    center = state.complex.points[vertex_id]
    rng = np.random.default_rng([state.seed, state.k, vertex_id, attempt])
    per_trial = sum(g.tuples.shape[0] * (g.tuples.shape[1] + 1) ** 2 for g in groups)
    batch_cap = max(
        1, min(settings.trial_batch_size, _EXCESS_BUDGET // max(per_trial, 1))
    )
    spent = 0
    batch = 1
    while spent < max_trials:
        batch = min(batch, max_trials - spent)
        trials = sample_ball(center, delta_next * _RADIUS_SHRINK, batch, rng)
        bad = _rejected(trials, groups, state.params, d)
        free = np.flatnonzero(~bad)
        if free.size:
            return trials[free[0]], spent + int(free[0]) + 1
        spent += batch
        batch = batch_cap
    return None, spent


def find_good_position(
    vertex_id: int,
    candidates: list[Tuple],
    delta_next: float,
    d_next: float,
    state: StageState,
    max_trials: Optional[int] = None,
) -> np.ndarray:
    """
    Position within delta_next of the vertex outside every candidate's bad region.

    An empty candidate list keeps the current position. Raises
    PerturbationError when max_trials draws are all rejected.
    """
    position, _ = _search_or_keep(
        vertex_id, candidates, delta_next, d_next, state, max_trials, attempt=0
    )
    if position is None:
        budget = settings.max_trials if max_trials is None else max_trials
        raise PerturbationError(vertex_id, state.k, budget)
    return position


def _search_or_keep(
    vertex_id: int,
    candidates: list[Tuple],
    delta_next: float,
    d: float,
    state: StageState,
    max_trials: Optional[int],
    attempt: int,
) -> tuple[Optional[np.ndarray], int]:
    points = state.complex.points
    if not candidates:
        return points[vertex_id].copy(), 0
    groups = _group_candidates(candidates, points, state.params)
    if not groups:
        return points[vertex_id].copy(), 0
    budget = settings.max_trials if max_trials is None else max_trials
    return _rejection_search(vertex_id, groups, delta_next, d, state, budget, attempt)


def _interior_faces(complex_: SimplexComplex, top: int) -> dict[int, np.ndarray]:
    """Vertex tuples of the interior faces of dimension 1..top, keyed by size."""
    faces: set[Tuple] = set()
    for cell in complex_.interior_cells():
        for size in range(2, top + 2):
            faces.update(combinations(cell, size))
    by_size: dict[int, list[Tuple]] = {}
    for face in sorted(faces):
        by_size.setdefault(len(face), []).append(face)
    return {size: np.asarray(group, dtype=int) for size, group in by_size.items()}


def audit_stage(complex_: SimplexComplex, params: QualityParams, top: int, d: float) -> int:
    """Interior simplices of dimension 1..top that are not (a, b, d)-good."""
    bad = 0
    for group in _interior_faces(complex_, top).values():
        metrics = simplex_metrics(complex_.points[group])
        bad += int(np.count_nonzero(~good_mask(metrics, params.a, params.b, d)))
    return bad


def weakest_altitude(complex_: SimplexComplex, params: QualityParams, top: int) -> float:
    """Smallest altitude of an interior face of dimension 2..top with edges in [a, b]."""
    lowest = np.inf
    for size, group in _interior_faces(complex_, top).items():
        if size < 3:
            continue
        metrics = simplex_metrics(complex_.points[group])
        inside = window_mask(metrics, params.a, params.b)
        if np.any(inside):
            lowest = min(lowest, float(np.min(metrics.altitudes[inside])))
    return float(lowest)


def max_displacement(complex_: SimplexComplex, origin: np.ndarray) -> float:
    if origin.shape[0] == 0:
        return 0.0
    return float(np.max(np.atleast_1d(hdist(complex_.points, origin))))


@trace_operation("perturber", "run_stage")
def run_stage(state: StageState) -> StageState:
    """
    Perturb every interior vertex once; returns the state entering stage k+1.

    The complex is updated in place after each move. A stage whose final
    audit still finds simplices that are not good raises StageAuditError; in
    adaptive mode the recorded d is first lowered to the weakest altitude.
    """
    started = time.perf_counter()
    params, k = state.params, state.k
    delta_next = state.delta_next
    if state.mode is PerturbationMode.THEORETICAL:
        if k + 1 not in params.d:
            raise UsageError(f"theoretical mode needs d_{k + 1} in the schedule")
        target = params.d[k + 1]
        budget = settings.max_trials
    else:
        target = state.achieved[k] / settings.adaptive_initial_divisor
        budget = settings.adaptive_max_trials
    initial_target = target
    halvings = 0
    moved = 0
    total_trials = 0
    largest = 0
    bound = candidate_bound(state)
    logger.info(
        "🚀 stage k=%d: delta=%.3e, target d=%.3e (%s)",
        k,
        delta_next,
        target,
        state.mode.value,
    )

    seen = set(state.processed)
    for vertex in state.complex.interior_vertices():
        if vertex in seen:
            raise UsageError(f"vertex {vertex} already perturbed in stage {k}")
        candidates = candidate_simplices(vertex, state)
        largest = max(largest, len(candidates))
        attempt = 0
        while True:
            position, trials = _search_or_keep(
                vertex, candidates, delta_next, target, state, budget, attempt
            )
            total_trials += trials
            if position is not None:
                break
            if state.mode is PerturbationMode.THEORETICAL:
                raise PerturbationError(vertex, k, budget)
            target /= 2.0
            halvings += 1
            attempt += 1
            logger.warning(
                "⚠️ vertex %d exhausted %d trials; stage k=%d target halved to %.3e",
                vertex,
                budget,
                k,
                target,
            )
        if trials:
            state.complex.relocate(vertex, position, max_displacement=delta_next)
            moved += 1
        state.processed.append(vertex)
        seen.add(vertex)
        logger.debug("vertex %d placed after %d trials", vertex, trials)

    bad_after = audit_stage(state.complex, params, k + 1, target)
    if bad_after and state.mode is PerturbationMode.ADAPTIVE:
        floor = weakest_altitude(state.complex, params, k + 1)
        if 0.0 < floor < target:
            logger.warning(
                "⚠️ stage k=%d audit: %d interior simplices below d=%.3e; recording d=%.3e",
                k,
                bad_after,
                target,
                floor,
            )
            target = floor
            bad_after = audit_stage(state.complex, params, k + 1, target)
    if bad_after:
        raise StageAuditError(k, bad_after, target)

    report = StageReport(
        k=k,
        delta_next=delta_next,
        target_d=initial_target,
        achieved_d=target,
        halvings=halvings,
        vertices_processed=len(state.processed),
        vertices_moved=moved,
        total_trials=total_trials,
        max_candidates=largest,
        candidate_bound=bound,
        max_displacement=max_displacement(state.complex, state.origin),
        bad_after=bad_after,
        elapsed_s=time.perf_counter() - started,
    )
    annotate_span(k=k, vertices=report.vertices_processed, achieved_d=target)
    logger.info(
        "✅ stage k=%d: %d/%d vertices moved, d_%d=%.3e, %d halvings",
        k,
        moved,
        report.vertices_processed,
        k + 1,
        target,
        halvings,
    )
    achieved = dict(state.achieved)
    achieved[k + 1] = target
    return StageState(
        k=k + 1,
        complex=state.complex,
        params=params,
        seed=state.seed,
        mode=state.mode,
        achieved=achieved,
        origin=state.origin,
        reports=state.reports + [report],
    )


class RefineResult(NamedTuple):
    complex: SimplexComplex
    achieved_d: dict[int, float]
    reports: list[StageReport]
    max_displacement: float
    params: QualityParams


@trace_operation("perturber", "refine")
def refine(
    source: Union[PointSet, SimplexComplex],
    params: Optional[QualityParams] = None,
    mode: PerturbationMode = PerturbationMode.ADAPTIVE,
    seed: Optional[int] = None,
) -> RefineResult:
    """
    Run stages k = 2..n-1 on the Delaunay complex of `source`.

    Triangles need no perturbation: d_2 = h0_bound(a, b, c) holds for every
    admissible triangle. `source` is never modified.
    """
    complex_ = build_delaunay(source) if isinstance(source, PointSet) else source.copy()
    n = complex_.n
    if params is None:
        if complex_.mu is None:
            raise UsageError("refine needs params or a point set carrying mu")
        params = (
            quality_params(n, complex_.mu)
            if mode is PerturbationMode.THEORETICAL
            else QualityParams.from_mu(n, complex_.mu)
        )
    if params.n != n:
        raise UsageError(f"params are for n={params.n}, complex has n={n}")
    if mode is PerturbationMode.THEORETICAL and set(params.d) != set(range(2, n + 1)):
        params = quality_params(n, params.mu)

    d2 = params.d.get(2, h0_bound(params.a, params.b, params.c))
    state = StageState(
        k=2,
        complex=complex_,
        params=params,
        seed=complex_.seed if seed is None else seed,
        mode=mode,
        achieved={2: d2},
        origin=complex_.points.copy(),
    )
    while state.k < n:
        state = run_stage(state)
    return RefineResult(
        complex=state.complex,
        achieved_d=state.achieved,
        reports=state.reports,
        max_displacement=max_displacement(state.complex, state.origin),
        params=params,
    )
