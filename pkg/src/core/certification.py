"""Thickness certificate of a finished complex.

Every interior top cell is audited against (a, b, d)-goodness at the
achieved d, and a bilipschitz constant is estimated by comparing each cell
with the unit-edge regular Euclidean simplex through Klein coordinates.
"""

from __future__ import annotations

import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

from src.models.quality import CertReport, Histogram, QualityParams, SimplexRecord

from .config import settings
from .delaunay import SimplexComplex
from .errors import DegeneracyError, UsageError
from .hyperbolic import (
    PointLike,
    boost_to_origin,
    circumsphere,
    points_matrix,
    restrict_to_span,
    to_klein,
)
from .quality import (
    SimplexMetrics,
    badness_from_metrics,
    dihedral_from_metrics,
    good_mask,
    simplex_metrics,
    window_mask,
)
from .telemetry import annotate_span, trace_operation

logger = logging.getLogger(__name__)


def standard_simplex(k: int) -> np.ndarray:
    """Vertices (k+1, k) of the regular Euclidean k-simplex with unit edges."""
    basis = linalg.null_space(np.ones((1, k + 1)))
    return basis / math.sqrt(2.0)


def barycentric_grid(k: int, depth: int) -> np.ndarray:
    """Barycentric coordinates j / depth with integer j summing to depth, shape (G, k+1)."""
    rows: list[list[int]] = []

    def extend(prefix: list[int], remaining: int, slots: int) -> None:
        if slots == 1:
            rows.append(prefix + [remaining])
            return
        for j in range(remaining + 1):
            extend(prefix + [j], remaining - j, slots - 1)

    extend([], depth, k + 1)
    return np.asarray(rows, dtype=float) / depth


def bilipschitz_estimate(
    vertices: Sequence[PointLike] | np.ndarray, depth: Optional[int] = None
) -> float:
    """
    Distortion of the Klein-affine map from a simplex onto the standard simplex.

    The simplex is moved so its circumcenter is the basepoint; in Klein
    coordinates it is a straight simplex and an affine map carries it to the
    unit-edge regular simplex. The estimate is the largest max(s_max, 1/s_min)
    over a barycentric grid, with singular values of the differential taken
    from the hyperbolic metric to the Euclidean one.
    """
    depth = settings.bilipschitz_grid_depth if depth is None else depth
    matrix = points_matrix(vertices)
    k = matrix.shape[0] - 1
    if k < 1:
        raise DegeneracyError("a simplex needs at least two vertices")
    if k < matrix.shape[1] - 1:
        matrix, _ = restrict_to_span(matrix)
    center = circumsphere(matrix).center
    klein = to_klein(boost_to_origin(center, matrix))

    target = standard_simplex(k)
    frame = (klein[1:] - klein[0]).T
    if abs(np.linalg.det(frame)) <= np.finfo(float).eps * np.max(np.abs(frame)) ** k:
        raise DegeneracyError("simplex is degenerate in Klein coordinates")
    affine = (target[1:] - target[0]).T @ np.linalg.inv(frame)

    samples = barycentric_grid(k, depth) @ klein
    radial = np.sum(samples**2, axis=1)
    s = np.sqrt(1.0 - radial)
    inverse_root = s[:, None, None] * np.eye(k) - (s / (1.0 + s))[:, None, None] * (
        samples[:, :, None] * samples[:, None, :]
    )
    singular = np.linalg.svd(affine @ inverse_root, compute_uv=False)
    stretch = np.max(singular[:, 0])
    shrink = np.min(singular[:, -1])
    if shrink <= 0.0:
        raise DegeneracyError("differential is singular on the sample grid")
    return float(max(stretch, 1.0 / shrink, 1.0))


def _slice(metrics: SimplexMetrics, index: int) -> SimplexMetrics:
    return SimplexMetrics(*(field[index] for field in metrics))


def _histogram(values: np.ndarray, bins: int) -> Histogram:
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return Histogram()
    counts, edges = np.histogram(finite, bins=bins)
    return Histogram(bin_edges=edges.tolist(), counts=counts.tolist())


@trace_operation("certifier", "certify")
def certify(
    complex_: SimplexComplex,
    params: QualityParams,
    achieved_d: dict[int, float],
    max_displacement: Optional[float] = None,
) -> CertReport:
    """
    Audit every interior top cell against (a, b, achieved_d[n])-goodness.

    Read-only. Failures are report content; an empty interior passes
    vacuously with a warning.
    """
    n = complex_.n
    d = achieved_d.get(n, params.d.get(n))
    if d is None or d <= 0.0:
        raise UsageError(f"no positive altitude bound for dimension {n}")
    depth = settings.bilipschitz_grid_depth
    cells = complex_.interior_cells()
    warnings: list[str] = []

    if not cells:
        warnings.append("no interior cell: the certificate is vacuous")
        logger.warning("⚠️ certification is vacuous: no interior cells")
        return CertReport(
            n=n,
            params=params,
            achieved_d=dict(achieved_d),
            d_checked=d,
            passed=True,
            vacuous=True,
            interior_cells=0,
            good_cells=0,
            L_estimate=1.0,
            grid_depth=depth,
            max_displacement=max_displacement,
            warnings=warnings,
        )

    vertices = complex_.points[np.asarray(cells, dtype=int)]
    metrics = simplex_metrics(vertices)
    good = good_mask(metrics, params.a, params.b, d)
    in_window = window_mask(metrics, params.a, params.b, params.c)
    dihedrals = dihedral_from_metrics(metrics)
    min_altitudes = np.min(metrics.altitudes, axis=-1)

    records = []
    failed = []
    estimates = []
    for index, cell in enumerate(cells):
        cell_metrics = _slice(metrics, index)
        is_good = bool(good[index])
        badness = None if is_good else badness_from_metrics(
            cell_metrics, params.a, params.b, params.c, d
        )
        try:
            bilipschitz: Optional[float] = bilipschitz_estimate(vertices[index], depth)
        except DegeneracyError:
            bilipschitz = None
        if bilipschitz is not None:
            estimates.append(bilipschitz)
        angles = dihedrals[index]
        radius = float(cell_metrics.circumradius)
        records.append(
            SimplexRecord(
                vertices=list(cell),
                edges=sorted(float(e) for e in cell_metrics.edges),
                circumradius=radius if math.isfinite(radius) else None,
                min_altitude=float(min_altitudes[index]),
                good=is_good,
                badness=badness,
                min_dihedral=float(np.min(angles)) if np.all(np.isfinite(angles)) else None,
                bilipschitz=bilipschitz,
            )
        )
        if not is_good:
            failed.append(list(cell))

    window_violations = int(np.count_nonzero(~in_window))
    if window_violations:
        warnings.append(
            f"{window_violations} interior cells leave the edge/circumradius window"
        )
    passed = not failed
    bins = settings.histogram_bins
    report = CertReport(
        n=n,
        params=params,
        achieved_d=dict(achieved_d),
        d_checked=d,
        passed=passed,
        vacuous=False,
        interior_cells=len(cells),
        good_cells=len(cells) - len(failed),
        failed_cells=failed,
        window_violations=window_violations,
        L_estimate=max(estimates, default=1.0),
        grid_depth=depth,
        max_displacement=max_displacement,
        altitude_histogram=_histogram(min_altitudes, bins),
        dihedral_histogram=_histogram(dihedrals.ravel(), bins),
        records=records,
        warnings=warnings,
    )
    annotate_span(interior_cells=len(cells), failed_cells=len(failed), passed=passed)
    if passed:
        logger.info(
            "✅ certified %d interior cells at d=%.3e, L=%.3f", len(cells), d, report.L_estimate
        )
    else:
        logger.error("❌ %d of %d interior cells fail at d=%.3e", len(failed), len(cells), d)
    return report
