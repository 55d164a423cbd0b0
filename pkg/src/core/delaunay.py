"""Hyperbolic Delaunay complexes.

Hyperbolic spheres are Euclidean spheres in the Poincare ball, so the
Delaunay complex of a finite set of H^n is computed by Qhull on Poincare
coordinates. Cells are stored by integer id as sorted vertex tuples together
with the vertex stars and facet cofaces needed for local updates.
"""

from __future__ import annotations

import logging
from collections import defaultdict, deque
from itertools import combinations
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.spatial import Delaunay, QhullError, cKDTree

from src.models.mesh import MeshDocument
from src.models.point_set import PatchDomain, PointSet

from .config import settings
from .errors import ArtifactValidationError, DegeneracyError, UsageError
from .hyperbolic import as_coords, circumspheres, hdist, normalize, to_poincare
from .predicates import insphere, orient
from .telemetry import annotate_span, trace_operation

logger = logging.getLogger(__name__)

Cell = tuple[int, ...]

_MAX_WALK_STEPS = 10_000


def _triangulate(coords: np.ndarray, n: int) -> np.ndarray:
    """Top cells of the Euclidean Delaunay complex of `coords`, rows sorted."""
    count = coords.shape[0]
    if count < n + 1:
        return np.empty((0, n + 1), dtype=int)
    if count == n + 1:
        if orient(coords) == 0:
            raise DegeneracyError(
                "the n+1 points are affinely dependent", simplex=tuple(range(count))
            )
        return np.arange(count, dtype=int)[None, :]
    try:
        tri = Delaunay(coords)
    except QhullError as exc:
        raise DegeneracyError(f"Qhull could not triangulate the points: {exc}") from exc
    if tri.coplanar.size:
        raise DegeneracyError(
            "points left out of the triangulation (duplicate or coplanar)",
            simplex=tuple(int(i) for i in np.unique(tri.coplanar[:, 0])),
        )
    return np.sort(tri.simplices.astype(int), axis=1)


class SimplexComplex:
    """
    Delaunay complex of a point set, top cells indexed by id.

    Positions are mutable only through relocate(); everything else reads.
    """

    def __init__(
        self,
        points: np.ndarray,
        cells: Iterable[Sequence[int]],
        *,
        epsilon: float,
        seed: int,
        domain: Optional[PatchDomain] = None,
        mu: Optional[float] = None,
    ) -> None:
        self.points = np.array(points, dtype=float)
        self.n = int(self.points.shape[1] - 1)
        self.epsilon = epsilon
        self.seed = seed
        self.domain = domain
        self.mu = mu
        self._poincare = to_poincare(self.points)
        self._reset(cells)

    # ------------------------------------------------------------------ storage

    def _reset(self, cells: Iterable[Sequence[int]]) -> None:
        self._cells: dict[int, Cell] = {}
        self._ids: dict[Cell, int] = {}
        self._star: dict[int, set[int]] = defaultdict(set)
        self._cofaces: dict[Cell, set[int]] = defaultdict(set)
        self._interior: dict[int, bool] = {}
        self._next_id = 0
        self._add_cells([tuple(sorted(int(v) for v in cell)) for cell in cells])

    def _add_cells(self, cells: list[Cell]) -> list[int]:
        if not cells:
            return []
        flags = self._interior_flags(np.asarray(cells, dtype=int))
        added = []
        for cell, flag in zip(cells, flags):
            if cell in self._ids:
                raise DegeneracyError("cell inserted twice", simplex=cell)
            cid = self._next_id
            self._next_id += 1
            self._cells[cid] = cell
            self._ids[cell] = cid
            self._interior[cid] = bool(flag)
            for v in cell:
                self._star[v].add(cid)
            for facet in combinations(cell, self.n):
                self._cofaces[facet].add(cid)
            added.append(cid)
        return added

    def _remove_cell(self, cid: int) -> None:
        cell = self._cells.pop(cid)
        del self._ids[cell]
        del self._interior[cid]
        for v in cell:
            self._star[v].discard(cid)
        for facet in combinations(cell, self.n):
            cofaces = self._cofaces[facet]
            cofaces.discard(cid)
            if not cofaces:
                del self._cofaces[facet]

    def _interior_flags(self, cells: np.ndarray) -> np.ndarray:
        """A cell is interior when its circumball lies in the shrunk domain."""
        if self.domain is None:
            return np.ones(cells.shape[0], dtype=bool)
        centers, radii = circumspheres(self.points[cells])
        bounded = np.isfinite(radii)
        reach = np.full(radii.shape, np.inf)
        if np.any(bounded):
            reach[bounded] = (
                self.domain.distance_to_center(centers[bounded]) + radii[bounded]
            )
        return reach <= self.domain.shrunk_radius

    # ------------------------------------------------------------------ queries

    def __len__(self) -> int:
        return len(self._cells)

    @property
    def vertex_count(self) -> int:
        return int(self.points.shape[0])

    @property
    def top_cells(self) -> dict[int, Cell]:
        return self._cells

    def cell(self, cid: int) -> Cell:
        return self._cells[cid]

    def is_interior(self, cid: int) -> bool:
        return self._interior[cid]

    def interior_cells(self) -> list[Cell]:
        return [self._cells[cid] for cid in sorted(self._cells) if self._interior[cid]]

    def cells(self, k: int) -> list[Cell]:
        """Sorted k-faces of the complex, 1 <= k <= n."""
        if not 1 <= k <= self.n:
            raise UsageError(f"cell dimension must be in 1..{self.n}, got {k}")
        if k == self.n:
            return sorted(self._cells.values())
        faces = {face for cell in self._cells.values() for face in combinations(cell, k + 1)}
        return sorted(faces)

    def cells_by_dimension(self) -> dict[int, list[Cell]]:
        return {k: self.cells(k) for k in range(1, self.n + 1)}

    def combinatorics(self) -> frozenset[Cell]:
        return frozenset(self._cells.values())

    def star(self, vertex: int) -> list[Cell]:
        return sorted(self._cells[cid] for cid in self._star.get(vertex, ()))

    def neighbors(self, vertex: int) -> set[int]:
        linked = {v for cid in self._star.get(vertex, ()) for v in self._cells[cid]}
        linked.discard(vertex)
        return linked

    def facet_cofaces(self, facet: Sequence[int]) -> list[Cell]:
        return sorted(self._cells[cid] for cid in self._cofaces.get(tuple(sorted(facet)), ()))

    def hull_vertices(self) -> set[int]:
        return {
            v for facet, cofaces in self._cofaces.items() if len(cofaces) == 1 for v in facet
        }

    def on_hull(self, vertex: int) -> bool:
        for cid in self._star.get(vertex, ()):
            for facet in combinations(self._cells[cid], self.n):
                if vertex in facet and len(self._cofaces[facet]) == 1:
                    return True
        return False

    def interior_vertices(self) -> list[int]:
        """Vertex ids inside the shrunk domain (all vertices without a domain)."""
        if self.domain is None:
            return list(range(self.vertex_count))
        mask = self.domain.in_shrunk(self.points)
        return [int(i) for i in np.flatnonzero(mask)]

    def point_set(self) -> PointSet:
        return PointSet(
            n=self.n,
            epsilon=self.epsilon,
            seed=self.seed,
            points=self.points.copy(),
            domain=self.domain,
            mu=self.mu,
        )

    def copy(self) -> SimplexComplex:
        clone = SimplexComplex.__new__(SimplexComplex)
        clone.points = self.points.copy()
        clone.n = self.n
        clone.epsilon = self.epsilon
        clone.seed = self.seed
        clone.domain = self.domain
        clone.mu = self.mu
        clone._poincare = self._poincare.copy()
        clone._cells = dict(self._cells)
        clone._ids = dict(self._ids)
        clone._star = defaultdict(set, {v: set(s) for v, s in self._star.items()})
        clone._cofaces = defaultdict(set, {f: set(s) for f, s in self._cofaces.items()})
        clone._interior = dict(self._interior)
        clone._next_id = self._next_id
        return clone

    def validate(self) -> list[str]:
        """Structural problems; empty for a well-formed complex."""
        problems = []
        for facet, cofaces in self._cofaces.items():
            if not 1 <= len(cofaces) <= 2:
                problems.append(f"facet {list(facet)} has {len(cofaces)} cofaces")
        used = {v for cell in self._cells.values() for v in cell}
        if self._cells and len(used) != self.vertex_count:
            missing = sorted(set(range(self.vertex_count)) - used)
            problems.append(f"vertices {missing[:10]} belong to no cell")
        return problems

    # ------------------------------------------------------------------ updates

    def rebuild(self) -> None:
        self._poincare = to_poincare(self.points)
        self._reset(_triangulate(self._poincare, self.n).tolist())

    def _beyond_facet(self, cell: Cell, target: np.ndarray) -> Optional[int]:
        """Index of a facet of `cell` separating it from `target`, None if inside."""
        coords = self._poincare[list(cell)]
        base = orient(coords)
        for i in range(len(cell)):
            replaced = coords.copy()
            replaced[i] = target
            if orient(replaced) * base < 0:
                return i
        return None

    def _locate(self, start: int, target: np.ndarray) -> Optional[int]:
        """Visibility walk from cell `start`; None when the walk leaves the hull."""
        current = start
        for _ in range(_MAX_WALK_STEPS):
            cell = self._cells[current]
            facet_index = self._beyond_facet(cell, target)
            if facet_index is None:
                return current
            facet = cell[:facet_index] + cell[facet_index + 1 :]
            across = self._cofaces[facet] - {current}
            if not across:
                return None
            current = next(iter(across))
        return None

    def _conflict_region(self, vertex: int, seeds: set[int], target: np.ndarray) -> set[int]:
        removed = set(seeds)
        queue = deque(seeds)
        while queue:
            cid = queue.popleft()
            for facet in combinations(self._cells[cid], self.n):
                for other in self._cofaces[facet]:
                    if other in removed:
                        continue
                    cell = self._cells[other]
                    if insphere(self._poincare[list(cell)], target, cell, vertex) > 0:
                        removed.add(other)
                        queue.append(other)
        return removed

    def _boundary(self, cells: Iterable[Cell]) -> set[Cell]:
        counts: dict[Cell, int] = defaultdict(int)
        for cell in cells:
            for facet in combinations(cell, self.n):
                counts[facet] += 1
        return {facet for facet, count in counts.items() if count == 1}

    def _fill_cavity(
        self, vertex: int, removed: set[int], target: np.ndarray
    ) -> Optional[list[Cell]]:
        """Delaunay cells of the cavity vertices lying inside the cavity."""
        removed_cells = [self._cells[cid] for cid in removed]
        ids = sorted({v for cell in removed_cells for v in cell})
        local = self._poincare[ids].copy()
        local[ids.index(vertex)] = target
        try:
            tri = Delaunay(local)
        except QhullError:
            return None
        if tri.coplanar.size:
            return None
        simplices = np.sort(np.asarray(ids)[tri.simplices], axis=1)
        centroids = local[tri.simplices].mean(axis=1)

        old = self._poincare[np.asarray(removed_cells)]
        frames = old[:, 1:, :] - old[:, :1, :]
        try:
            inverse = np.linalg.inv(np.transpose(frames, (0, 2, 1)))
        except np.linalg.LinAlgError:
            return None
        offsets = centroids[:, None, :] - old[None, :, 0, :]
        bary = np.einsum("cij,scj->sci", inverse, offsets)
        tol = settings.geometric_tolerance
        inside = np.all(bary >= -tol, axis=-1) & (bary.sum(axis=-1) <= 1.0 + tol)
        keep = np.any(inside, axis=1)
        return [tuple(int(v) for v in row) for row in simplices[keep]]

    def relocate(
        self,
        vertex: int,
        new_position: np.ndarray,
        max_displacement: Optional[float] = None,
    ) -> bool:
        """
        Move one vertex in place and restore the Delaunay property.

        The star of the vertex and the cells whose circumballs contain the new
        position are re-triangulated locally; hull vertices and any local
        failure fall back to a full rebuild. Returns True for a local update.
        The move may not exceed max_displacement, which defaults to
        delta = epsilon / 10 of the complex.
        """
        if not 0 <= vertex < self.vertex_count:
            raise UsageError(f"vertex {vertex} is not in the complex")
        position = normalize(as_coords(new_position))
        shift = float(hdist(self.points[vertex], position))
        bound = self.epsilon / 10.0 if max_displacement is None else max_displacement
        if shift > bound * (1.0 + 1e-12):
            raise UsageError(f"displacement {shift:.3e} exceeds the allowed {bound:.3e}")
        if shift == 0.0:
            return True
        target = to_poincare(position)

        star = set(self._star.get(vertex, ()))
        if not star or self.on_hull(vertex):
            self._commit_rebuild(vertex, position)
            return False
        start = self._locate(next(iter(star)), target)
        if start is None:
            self._commit_rebuild(vertex, position)
            return False

        removed = self._conflict_region(vertex, star | {start}, target)
        boundary = self._boundary(self._cells[cid] for cid in removed)
        if any(vertex in facet or len(self._cofaces[facet]) == 1 for facet in boundary):
            self._commit_rebuild(vertex, position)
            return False

        filled = self._fill_cavity(vertex, removed, target)
        if filled is None or self._boundary(filled) != boundary:
            logger.debug("local update of vertex %d failed, rebuilding", vertex)
            self._commit_rebuild(vertex, position)
            return False

        for cid in removed:
            self._remove_cell(cid)
        self.points[vertex] = position
        self._poincare[vertex] = target
        self._add_cells(filled)
        return True

    def _commit_rebuild(self, vertex: int, position: np.ndarray) -> None:
        self.points[vertex] = position
        self.rebuild()

    # ------------------------------------------------------------ serialization

    def to_document(
        self,
        achieved_d: Optional[dict[int, float]] = None,
        max_displacement: Optional[float] = None,
    ) -> MeshDocument:
        cells = {str(k): [list(c) for c in self.cells(k)] for k in range(1, self.n + 1)}
        top = sorted(self._cells.items(), key=lambda item: item[1])
        return MeshDocument(
            n=self.n,
            epsilon=self.epsilon,
            seed=self.seed,
            mu=self.mu,
            domain=self.domain,
            points=self.points.copy(),
            cells=cells,
            interior=[self._interior[cid] for cid, _ in top],
            achieved_d=achieved_d,
            max_displacement=max_displacement,
        )

    @classmethod
    def from_document(cls, document: MeshDocument) -> SimplexComplex:
        """Rebuild a complex from its artifact; flags and cofaces are re-checked."""
        complex_ = cls(
            document.points,
            document.top_cells,
            epsilon=document.epsilon,
            seed=document.seed,
            domain=document.domain,
            mu=document.mu,
        )
        problems = [p for p in complex_.validate() if "cofaces" in p]
        if problems:
            raise ArtifactValidationError("every facet has one or two cofaces", problems[0])
        top = sorted(complex_._cells.items(), key=lambda item: item[1])
        recomputed = [complex_._interior[cid] for cid, _ in top]
        if recomputed != list(document.interior):
            raise ArtifactValidationError(
                "interior flags match circumball containment in the shrunk domain"
            )
        return complex_


@trace_operation("delaunay", "build")
def build_delaunay(ps: PointSet, domain: Optional[PatchDomain] = None) -> SimplexComplex:
    """
    Hyperbolic Delaunay complex of a point set.

    Fewer than n+1 points give an empty complex and exactly n+1 a single
    cell; points Qhull cannot place raise DegeneracyError.
    """
    n = ps.dimension
    coords = to_poincare(ps.points)
    cells = _triangulate(coords, n)
    complex_ = SimplexComplex(
        ps.points,
        cells.tolist(),
        epsilon=ps.epsilon,
        seed=ps.seed,
        domain=domain if domain is not None else ps.domain,
        mu=ps.mu,
    )
    interior = len(complex_.interior_cells())
    annotate_span(vertices=len(ps), cells=len(complex_), interior_cells=interior)
    logger.info(
        "✅ Delaunay complex: %d vertices, %d cells (%d interior)",
        len(ps),
        len(complex_),
        interior,
    )
    return complex_


def empty_ball_violations(
    complex_: SimplexComplex, points: Optional[np.ndarray] = None
) -> list[tuple[Cell, int]]:
    """
    (cell, vertex) pairs where the vertex lies strictly inside the circumball
    of an interior cell.

    Candidates come from a KD-tree on Poincare coordinates: the hyperbolic
    distance is at least twice the Euclidean one, so a query radius of r/2
    finds every vertex within hyperbolic distance r.
    """
    pts = complex_.points if points is None else np.asarray(points, dtype=float)
    cells = complex_.interior_cells()
    if not cells:
        return []
    centers, radii = circumspheres(pts[np.asarray(cells)])
    bounded = np.isfinite(radii)
    tree = cKDTree(to_poincare(pts))
    tol = settings.geometric_tolerance
    violations = []
    for index in np.flatnonzero(bounded):
        center, radius = centers[index], float(radii[index])
        nearby = tree.query_ball_point(to_poincare(center), radius / 2.0)
        if not nearby:
            continue
        distances = np.atleast_1d(hdist(pts[nearby], center))
        for vertex, distance in zip(nearby, distances):
            if distance < radius - tol and vertex not in cells[index]:
                violations.append((cells[index], int(vertex)))
    return violations


def is_delaunay(complex_: SimplexComplex, ps: Optional[PointSet] = None) -> bool:
    """Every interior cell has an empty open circumball."""
    points = None if ps is None else ps.points
    return not empty_ball_violations(complex_, points)


def cospherical_groups(complex_: SimplexComplex) -> list[tuple[Cell, int]]:
    """(cell, vertex) pairs of adjacent cells whose n+2 vertices are co-spherical."""
    tol = settings.geometric_tolerance
    found = []
    for facet, cofaces in complex_._cofaces.items():
        if len(cofaces) != 2:
            continue
        first, second = (complex_.cell(cid) for cid in sorted(cofaces))
        opposite = next(v for v in second if v not in facet)
        centers, radii = circumspheres(complex_.points[np.asarray([first])])
        if not np.isfinite(radii[0]):
            continue
        distance = float(hdist(complex_.points[opposite], centers[0]))
        if abs(distance - float(radii[0])) <= tol:
            found.append((first, opposite))
    return found


def move_vertex(
    complex_: SimplexComplex,
    vertex_id: int,
    new_position: np.ndarray,
    max_displacement: Optional[float] = None,
) -> SimplexComplex:
    """Copy of the complex with one vertex moved and Delaunay restored."""
    moved = complex_.copy()
    moved.relocate(vertex_id, new_position, max_displacement)
    return moved


def write_off(complex_: SimplexComplex, path: Path) -> None:
    """OFF export of the triangles in Poincare coordinates (n = 2 or 3)."""
    if complex_.n not in (2, 3):
        raise UsageError("OFF export supports n = 2 and n = 3")
    coords = to_poincare(complex_.points)
    faces = complex_.cells(2)
    lines = ["OFF"]
    lines.append(f"{len(coords)} {len(faces)} 0")
    for row in coords:
        padded = list(row) + [0.0] * (3 - len(row))
        lines.append(" ".join(repr(float(x)) for x in padded))
    for face in faces:
        lines.append(" ".join([str(len(face))] + [str(v) for v in face]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info("💾 wrote OFF mesh with %d faces to %s", len(faces), path)
