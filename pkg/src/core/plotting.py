"""SVG rendering of H^2 complexes in the Poincare disk."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import numpy as np  # noqa: E402
from matplotlib import cm, colors, patches  # noqa: E402
from matplotlib.collections import LineCollection, PolyCollection  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from src.models.point_set import PatchDomain  # noqa: E402

from .delaunay import SimplexComplex  # noqa: E402
from .errors import UsageError  # noqa: E402
from .hyperbolic import boost_from_origin, geodesic_point, to_poincare  # noqa: E402
from .quality import simplex_metrics  # noqa: E402

logger = logging.getLogger(__name__)

_ARC_SAMPLES = 24


def geodesic_polyline(x: np.ndarray, y: np.ndarray, samples: int = _ARC_SAMPLES) -> np.ndarray:
    """Poincare-disk samples (samples, 2) along the geodesic from x to y."""
    fractions = np.linspace(0.0, 1.0, samples)
    return to_poincare(np.vstack([geodesic_point(x, y, float(t)) for t in fractions]))


def _cell_outline(points: np.ndarray, cell: tuple[int, ...]) -> np.ndarray:
    a, b, c = (points[v] for v in cell)
    return np.vstack(
        [
            geodesic_polyline(a, b)[:-1],
            geodesic_polyline(b, c)[:-1],
            geodesic_polyline(c, a)[:-1],
        ]
    )


def _domain_outline(domain: PatchDomain, samples: int = 256) -> np.ndarray:
    angles = np.linspace(0.0, 2.0 * np.pi, samples)
    radius = domain.radius
    ring = np.column_stack(
        [
            np.full_like(angles, np.cosh(radius)),
            np.sinh(radius) * np.cos(angles),
            np.sinh(radius) * np.sin(angles),
        ]
    )
    return to_poincare(boost_from_origin(domain.center.coords, ring))


def render_svg(
    complex_: SimplexComplex,
    path: Path,
    title: Optional[str] = None,
    cmap: str = "viridis",
) -> None:
    """
    Write the complex as SVG.

    Edges are drawn as sampled geodesic arcs, interior triangles are shaded
    by their minimum altitude, and the ideal boundary and the patch circle
    are outlined. Output is byte-stable for a given complex.
    """
    if complex_.n != 2:
        raise UsageError("SVG rendering supports n = 2 only")

    points = complex_.points
    figure = Figure(figsize=(6.0, 6.0))
    axes = figure.add_subplot(1, 1, 1)
    axes.set_aspect("equal")
    axes.set_xlim(-1.02, 1.02)
    axes.set_ylim(-1.02, 1.02)
    axes.axis("off")

    interior = complex_.interior_cells()
    if interior:
        altitudes = np.min(
            simplex_metrics(points[np.asarray(interior, dtype=int)]).altitudes, axis=-1
        )
        norm = colors.Normalize(vmin=float(np.min(altitudes)), vmax=float(np.max(altitudes)))
        colormap = matplotlib.colormaps[cmap]
        shading = PolyCollection(
            [_cell_outline(points, cell) for cell in interior],
            facecolors=colormap(norm(altitudes)),
            edgecolors="none",
        )
        axes.add_collection(shading)
        mappable = cm.ScalarMappable(norm=norm, cmap=colormap)
        figure.colorbar(mappable, ax=axes, shrink=0.7, label="min altitude")

    edges = complex_.cells(1)
    arcs = LineCollection(
        [geodesic_polyline(points[i], points[j]) for i, j in edges],
        colors="black",
        linewidths=0.4,
    )
    axes.add_collection(arcs)
    disk = to_poincare(points)
    axes.scatter(disk[:, 0], disk[:, 1], s=2.0, color="black")

    axes.add_patch(patches.Circle((0.0, 0.0), 1.0, fill=False, color="gray", linewidth=0.8))
    if complex_.domain is not None:
        outline = _domain_outline(complex_.domain)
        axes.plot(outline[:, 0], outline[:, 1], color="tab:red", linewidth=0.6)
    if title:
        axes.set_title(title)

    with matplotlib.rc_context({"svg.hashsalt": "thicktri"}):
        figure.savefig(path, format="svg", metadata={"Date": None})
    logger.info("💾 wrote SVG with %d edges to %s", len(edges), path)
