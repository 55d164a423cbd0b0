"""Hyperbolic geometry primitives in the hyperboloid model.

Points are rows of (..., n+1) float arrays on the upper sheet of
<x, x>_M = -1 with <x, y>_M = -x0*y0 + sum(xi*yi). Every function accepts
HPoint models or raw arrays; batched arrays broadcast over leading axes.
Poincare and Klein ball coordinates are (..., n) arrays.
"""

from __future__ import annotations

import math
from typing import Sequence, Union

import numpy as np
from scipy import integrate, linalg, special

from src.models.geometry import HPoint, Hyperplane, Sphere

from .config import settings
from .errors import DegeneracyError, UnboundedCircumsphereError, UsageError

PointLike = Union[HPoint, np.ndarray, Sequence[float]]


def as_coords(point: PointLike) -> np.ndarray:
    """Coordinates of an HPoint, or the input as a float array."""
    if isinstance(point, HPoint):
        return point.coords
    return np.asarray(point, dtype=float)


def points_matrix(points: Sequence[PointLike] | np.ndarray) -> np.ndarray:
    if isinstance(points, np.ndarray):
        return np.atleast_2d(points.astype(float))
    return np.vstack([as_coords(p) for p in points])


def minkowski_dot(x: PointLike, y: PointLike) -> float | np.ndarray:
    """-x0*y0 + sum(xi*yi); a float for vectors, an array for batches."""
    xa, ya = as_coords(x), as_coords(y)
    if xa.shape[-1] != ya.shape[-1]:
        raise UsageError(
            f"dimension mismatch: {xa.shape[-1]} vs {ya.shape[-1]} coordinates"
        )
    value = -xa[..., 0] * ya[..., 0] + np.sum(xa[..., 1:] * ya[..., 1:], axis=-1)
    return float(value) if np.ndim(value) == 0 else value


def normalize(x: PointLike) -> np.ndarray:
    """Rescale timelike vectors onto the upper sheet; x0 is recomputed exactly."""
    xa = as_coords(x)
    form = np.asarray(minkowski_dot(xa, xa))
    if np.any(form >= 0.0):
        raise UsageError("cannot normalize a non-timelike vector onto the hyperboloid")
    scaled = xa / np.sqrt(-form)[..., None]
    scaled = np.where(scaled[..., :1] < 0.0, -scaled, scaled)
    scaled[..., 0] = np.sqrt(1.0 + np.sum(scaled[..., 1:] ** 2, axis=-1))
    return scaled


def hdist(x: PointLike, y: PointLike) -> float | np.ndarray:
    """
    Hyperbolic distance arccosh(-<x, y>).

    Evaluated as 2 asinh(|x - y|_M / 2), which is exact for nearby points and
    clamps rounding below the light cone to 0.
    """
    xa, ya = as_coords(x), as_coords(y)
    diff = xa - ya
    form = np.asarray(minkowski_dot(diff, diff))
    value = 2.0 * np.arcsinh(np.sqrt(np.maximum(form, 0.0)) / 2.0)
    return float(value) if np.ndim(value) == 0 else value


def pairwise_distances(points: np.ndarray) -> np.ndarray:
    """(m, m) distance matrix of the rows of `points`."""
    diff = points[:, None, :] - points[None, :, :]
    form = -diff[..., 0] ** 2 + np.sum(diff[..., 1:] ** 2, axis=-1)
    return 2.0 * np.arcsinh(np.sqrt(np.maximum(form, 0.0)) / 2.0)


def geodesic_point(x: PointLike, y: PointLike, t: float) -> np.ndarray:
    """Point at distance t * hdist(x, y) from x toward y."""
    xa, ya = as_coords(x), as_coords(y)
    d = float(hdist(xa, ya))
    if d == 0.0:
        return xa.copy()
    combo = (math.sinh((1.0 - t) * d) * xa + math.sinh(t * d) * ya) / math.sinh(d)
    return normalize(combo)


def _sinhc(r: np.ndarray) -> np.ndarray:
    safe = np.where(r == 0.0, 1.0, r)
    return np.where(r < 1e-8, 1.0 + r * r / 6.0, np.sinh(safe) / safe)


def tangent_norm(v: np.ndarray) -> np.ndarray:
    form = np.asarray(minkowski_dot(v, v))
    return np.sqrt(np.maximum(form, 0.0))


def exp_map(p: PointLike, v: np.ndarray) -> np.ndarray:
    """exp_p(v) = cosh|v| p + sinh|v| v/|v| for v tangent at p."""
    pa = as_coords(p)
    va = np.asarray(v, dtype=float)
    r = tangent_norm(va)
    out = np.cosh(r)[..., None] * pa + _sinhc(r)[..., None] * va
    return normalize(out)


def log_map(p: PointLike, q: PointLike) -> np.ndarray:
    """Tangent vector at p of length hdist(p, q) pointing toward q."""
    pa, qa = as_coords(p), as_coords(q)
    d = np.asarray(hdist(pa, qa))
    u = qa + np.asarray(minkowski_dot(pa, qa))[..., None] * pa
    return u / _sinhc(d)[..., None]


def boost_matrix(p: PointLike) -> np.ndarray:
    """Lorentz boost sending the basepoint (1, 0, ..., 0) to p."""
    pa = as_coords(p)
    spatial = pa[1:]
    dim = pa.shape[0]
    boost = np.empty((dim, dim))
    boost[0, 0] = pa[0]
    boost[0, 1:] = spatial
    boost[1:, 0] = spatial
    boost[1:, 1:] = np.eye(dim - 1) + np.outer(spatial, spatial) / (1.0 + pa[0])
    return boost


def boost_from_origin(p: PointLike, x: PointLike) -> np.ndarray:
    """Image of x under the boost taking the basepoint to p."""
    return normalize(as_coords(x) @ boost_matrix(p).T)


def boost_to_origin(p: PointLike, x: PointLike) -> np.ndarray:
    """Image of x under the boost taking p to the basepoint."""
    pa = as_coords(p).copy()
    pa[1:] = -pa[1:]
    return normalize(as_coords(x) @ boost_matrix(pa).T)


def to_poincare(p: PointLike) -> np.ndarray:
    pa = as_coords(p)
    return pa[..., 1:] / (1.0 + pa[..., :1])


def from_poincare(x: np.ndarray | Sequence[float]) -> np.ndarray:
    xa = np.asarray(x, dtype=float)
    r2 = np.sum(xa**2, axis=-1)
    if np.any(r2 >= 1.0):
        raise UsageError("Poincare coordinates must lie strictly inside the unit ball")
    denom = (1.0 - r2)[..., None]
    out = np.concatenate([(1.0 + r2)[..., None], 2.0 * xa], axis=-1) / denom
    return normalize(out)


def to_klein(p: PointLike) -> np.ndarray:
    pa = as_coords(p)
    return pa[..., 1:] / pa[..., :1]


def from_klein(y: np.ndarray | Sequence[float]) -> np.ndarray:
    ya = np.asarray(y, dtype=float)
    r2 = np.sum(ya**2, axis=-1)
    if np.any(r2 >= 1.0):
        raise UsageError("Klein coordinates must lie strictly inside the unit ball")
    out = np.concatenate([np.ones_like(r2)[..., None], ya], axis=-1)
    return normalize(out / np.sqrt(1.0 - r2)[..., None])


def geodesic_span(points: Sequence[PointLike] | np.ndarray) -> np.ndarray:
    """
    Minkowski-orthonormal basis (rows) of the linear span of `points`.

    Row 0 is the future timelike unit vector, the others are spacelike; the
    span meets the hyperboloid in the geodesic subspace through the points.
    """
    matrix = points_matrix(points)
    basis = linalg.orth(matrix.T)
    if basis.shape[1] < matrix.shape[0]:
        raise DegeneracyError("points are linearly dependent")
    sign = np.ones(matrix.shape[1])
    sign[0] = -1.0
    gram = basis.T @ (sign[:, None] * basis)
    eigenvalues, eigenvectors = np.linalg.eigh(gram)
    if eigenvalues[0] >= 0.0 or (eigenvalues.size > 1 and eigenvalues[1] <= 0.0):
        raise DegeneracyError("span does not have Lorentzian signature")
    frame = (basis @ eigenvectors) / np.sqrt(np.abs(eigenvalues))
    rows = frame.T
    if rows[0, 0] < 0.0:
        rows[0] = -rows[0]
    return rows


def restrict_to_span(
    points: Sequence[PointLike] | np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Intrinsic coordinates of `points` in the H^k they span.

    Returns (coords, frame) with coords @ frame reproducing the points.
    """
    matrix = points_matrix(points)
    frame = geodesic_span(matrix)
    products = matrix @ (frame * _signature(frame.shape[1])).T
    coords = products.copy()
    coords[:, 0] = -products[:, 0]
    return normalize(coords), frame


def _signature(dim: int) -> np.ndarray:
    sign = np.ones(dim)
    sign[0] = -1.0
    return sign


def project_to_span(p: PointLike, frame: np.ndarray) -> np.ndarray:
    """Nearest point to p on the geodesic subspace with Minkowski-orthonormal `frame`."""
    pa = as_coords(p)
    products = pa @ (frame * _signature(frame.shape[1])).T
    coefficients = products.copy()
    coefficients[..., 0] = -products[..., 0]
    return normalize(coefficients @ frame)


def hyperplane_span(
    points: Sequence[PointLike] | np.ndarray,
    ambient_subspace: np.ndarray | None = None,
) -> Hyperplane:
    """
    Hyperplane through `points`.

    Without `ambient_subspace` the k points must span a hyperplane of H^n
    (k = n). With a frame of a geodesic subspace (rows, as from
    geodesic_span) the hyperplane is taken inside that subspace.
    """
    matrix = points_matrix(points)
    sign = _signature(matrix.shape[1])
    constraints = matrix * sign
    if ambient_subspace is None:
        kernel = linalg.null_space(constraints)
        if kernel.shape[1] != 1:
            raise DegeneracyError(
                f"{matrix.shape[0]} points do not span a hyperplane of H^{matrix.shape[1] - 1}"
            )
        normal = kernel[:, 0]
    else:
        frame = np.atleast_2d(ambient_subspace)
        kernel = linalg.null_space(constraints @ frame.T)
        if kernel.shape[1] != 1:
            raise DegeneracyError("points do not span a hyperplane of the subspace")
        normal = frame.T @ kernel[:, 0]
    form = float(minkowski_dot(normal, normal))
    if form <= 0.0:
        raise DegeneracyError("hyperplane normal is not spacelike")
    return Hyperplane(normal=normal / math.sqrt(form))


def dist_to_hyperplane(p: PointLike, plane: Hyperplane) -> float | np.ndarray:
    value = np.arcsinh(np.abs(np.asarray(minkowski_dot(p, plane.normal))))
    return float(value) if np.ndim(value) == 0 else value


def project_to_hyperplane(p: PointLike, plane: Hyperplane) -> np.ndarray:
    """Foot of the perpendicular from p to the hyperplane."""
    pa = as_coords(p)
    s = np.asarray(minkowski_dot(pa, plane.normal))
    foot = pa - s[..., None] * plane.normal
    return normalize(foot)


def hyperplane_angle(first: Hyperplane, second: Hyperplane) -> float:
    """Angle in [0, pi] between the normals of two intersecting hyperplanes."""
    cosine = float(minkowski_dot(first.normal, second.normal))
    if abs(cosine) > 1.0 + settings.geometric_tolerance:
        raise UsageError("hyperplanes do not intersect")
    return math.acos(max(-1.0, min(1.0, cosine)))


def excess_matrix(vertices: np.ndarray) -> np.ndarray:
    """
    E_ij = <vi - vj, vi - vj>_M / 2 = cosh d_ij - 1 for vertex arrays (..., m, n+1).

    Intrinsic to the simplex; the circumsphere and altitude formulas below
    only need E.
    """
    diff = vertices[..., :, None, :] - vertices[..., None, :, :]
    form = -diff[..., 0] ** 2 + np.sum(diff[..., 1:] ** 2, axis=-1)
    return np.maximum(form, 0.0) / 2.0


def circumsphere(vertices: Sequence[PointLike] | np.ndarray) -> Sphere:
    """
    Circumsphere of a simplex inside its geodesic span.

    With mu = E^-1 1 and sigma = sum(mu): the center is the normalized
    sum(mu_i v_i) and sinh^2 r = 1 / sigma; sigma <= 0 means no bounded sphere.
    """
    matrix = points_matrix(vertices)
    if matrix.shape[0] == 1:
        return Sphere(center=HPoint(coords=matrix[0]), radius=0.0)
    excess = excess_matrix(matrix)
    try:
        weights = np.linalg.solve(excess, np.ones(matrix.shape[0]))
    except np.linalg.LinAlgError as exc:
        raise DegeneracyError("vertices are degenerate") from exc
    if not np.all(np.isfinite(weights)):
        raise DegeneracyError("vertices are degenerate")
    sigma = float(np.sum(weights))
    if sigma <= 0.0:
        raise UnboundedCircumsphereError("circumcenter is not timelike")
    center = normalize(weights @ matrix / sigma)
    radius = math.asinh(1.0 / math.sqrt(sigma))
    return Sphere(center=HPoint(coords=center), radius=radius)


def dist_to_sphere(p: PointLike, sphere: Sphere) -> float:
    return abs(float(hdist(p, sphere.center)) - sphere.radius)


def dist_to_subsphere(p: PointLike, vertices: Sequence[PointLike] | np.ndarray) -> float:
    """
    Distance from p to the circumsphere of `vertices` (a sphere inside their span).

    With foot f of p on the span, h = d(p, f) and t = d(f, center):
    cosh(dist) = cosh(h) cosh(|t - r|).
    """
    matrix = points_matrix(vertices)
    sphere = circumsphere(matrix)
    frame = geodesic_span(matrix)
    foot = project_to_span(p, frame)
    h = float(hdist(p, foot))
    t = float(hdist(foot, sphere.center))
    return math.acosh(math.cosh(h) * math.cosh(abs(t - sphere.radius)))


def unit_sphere_area(n: int) -> float:
    """Euclidean area of S^{n-1}."""
    return 2.0 * math.pi ** (n / 2.0) / float(special.gamma(n / 2.0))


def _sinh_minus_identity(x: float) -> float:
    if abs(x) < 0.5:
        x2 = x * x
        term, total = x * x2 / 6.0, 0.0
        for j in range(1, 9):
            total += term
            term *= x2 / ((2 * j + 2) * (2 * j + 3))
        return total
    return math.sinh(x) - x


def _radial_integral(n: int, r_in: float, r_out: float) -> float:
    value, _ = integrate.quad(
        lambda t: math.sinh(t) ** (n - 1),
        r_in,
        r_out,
        epsabs=0.0,
        epsrel=1e-12,
        limit=200,
    )
    return float(value)


def ball_volume(n: int, r: float) -> float:
    """Volume of a radius-r ball in H^n."""
    if n < 2:
        raise UsageError("ball_volume needs n >= 2")
    if r < 0.0:
        raise UsageError("radius must be non-negative")
    if r == 0.0:
        return 0.0
    if n == 2:
        return 4.0 * math.pi * math.sinh(r / 2.0) ** 2
    if n == 3:
        return math.pi * _sinh_minus_identity(2.0 * r)
    return unit_sphere_area(n) * _radial_integral(n, 0.0, r)


def shell_volume(n: int, r_in: float, r_out: float) -> float:
    """Volume of {r_in <= d(x, center) <= r_out}, stable for thin shells."""
    if n < 2:
        raise UsageError("shell_volume needs n >= 2")
    if not 0.0 <= r_in <= r_out:
        raise UsageError("shell radii must satisfy 0 <= r_in <= r_out")
    if r_in == r_out:
        return 0.0
    return _shell(n, r_out + r_in, r_out - r_in)


def _shell(n: int, total: float, gap: float) -> float:
    if n == 2:
        return 4.0 * math.pi * math.sinh(total / 2.0) * math.sinh(gap / 2.0)
    if n == 3:
        return (
            2.0
            * math.pi
            * (
                math.cosh(total) * _sinh_minus_identity(gap)
                + 2.0 * gap * math.sinh(total / 2.0) ** 2
            )
        )
    r_in, r_out = (total - gap) / 2.0, (total + gap) / 2.0
    return unit_sphere_area(n) * _radial_integral(n, r_in, r_out)


def sphere_volume(n: int, r: float) -> float:
    """Area of the hyperbolic (n-1)-sphere of radius r."""
    return unit_sphere_area(n) * math.sinh(r) ** (n - 1)


def annulus_volume(n: int, radius: float, half_width: float) -> float:
    """
    Volume of {x : |d(x, o) - radius| <= half_width}, the half_width-neighbourhood
    of a sphere of the given radius.

    Accurate when half_width is far below the resolution of radius.
    """
    if half_width < 0.0 or radius < 0.0:
        raise UsageError("radius and half_width must be non-negative")
    if half_width == 0.0:
        return 0.0
    if half_width >= radius:
        return ball_volume(n, radius + half_width)
    if n > 3 and half_width < 1e-6 * radius:
        # midpoint rule on a convex integrand, padded by its relative error
        return sphere_volume(n, radius) * 2.0 * half_width * (1.0 + 1e-6)
    return _shell(n, 2.0 * radius, 2.0 * half_width)


def angle_at_vertex(a: PointLike, b: PointLike, c: PointLike) -> float:
    """Angle at a between the geodesics toward b and c."""
    pa, pb, pc = as_coords(a), as_coords(b), as_coords(c)
    if float(hdist(pa, pb)) == 0.0 or float(hdist(pa, pc)) == 0.0:
        raise DegeneracyError("angle undefined at a coincident vertex")
    ub = pb + float(minkowski_dot(pa, pb)) * pa
    uc = pc + float(minkowski_dot(pa, pc)) * pa
    bb = float(minkowski_dot(ub, ub))
    cc = float(minkowski_dot(uc, uc))
    bc = float(minkowski_dot(ub, uc))
    return math.atan2(math.sqrt(max(bb * cc - bc * bc, 0.0)), bc)


def sample_ball(
    center: PointLike, radius: float, count: int, rng: np.random.Generator
) -> np.ndarray:
    """
    Uniform samples of the hyperbolic ball B(center, radius).

    Radial law proportional to sinh^{n-1}: exact inverse for n = 2, rejection
    against the Euclidean t^{n-1} law otherwise. Directions are normalized
    Gaussians; samples are built at the basepoint and boosted to `center`.
    """
    ca = as_coords(center)
    n = ca.shape[0] - 1
    if count <= 0:
        return np.empty((0, n + 1))
    if radius == 0.0:
        return np.repeat(ca[None, :], count, axis=0)
    if n == 2:
        u = rng.random(count)
        radii = 2.0 * np.arcsinh(np.sqrt(u) * math.sinh(radius / 2.0))
    else:
        ceiling = (math.sinh(radius) / radius) ** (n - 1)
        accepted: list[np.ndarray] = []
        remaining = count
        while remaining > 0:
            batch = max(2 * remaining, 16)
            proposal = radius * rng.random(batch) ** (1.0 / n)
            ratio = _sinhc(proposal) ** (n - 1) / ceiling
            keep = proposal[rng.random(batch) < ratio][:remaining]
            accepted.append(keep)
            remaining -= keep.shape[0]
        radii = np.concatenate(accepted)
    directions = rng.standard_normal((count, n))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    local = np.empty((count, n + 1))
    local[:, 0] = np.cosh(radii)
    local[:, 1:] = np.sinh(radii)[:, None] * directions
    return boost_from_origin(ca, local)


def batched_inverse(matrices: np.ndarray) -> np.ndarray:
    """np.linalg.inv over leading axes; singular items come back as NaN."""
    try:
        return np.linalg.inv(matrices)
    except np.linalg.LinAlgError:
        flat = matrices.reshape((-1,) + matrices.shape[-2:])
        inverse = np.full_like(flat, np.nan)
        for index, matrix in enumerate(flat):
            try:
                inverse[index] = np.linalg.inv(matrix)
            except np.linalg.LinAlgError:
                continue
        return inverse.reshape(matrices.shape)


def circumspheres(vertices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Batched circumcenters (..., n+1) and radii (...) of vertex arrays (..., m, n+1).

    Unbounded or degenerate configurations get radius inf and a NaN center.
    """
    inverse = batched_inverse(excess_matrix(vertices))
    with np.errstate(divide="ignore", invalid="ignore"):
        weights = inverse.sum(axis=-1)
        sigma = weights.sum(axis=-1)
        bounded = np.isfinite(sigma) & (sigma > 0.0)
        safe_sigma = np.where(bounded, sigma, 1.0)
        raw = np.einsum("...i,...ij->...j", weights, vertices) / safe_sigma[..., None]
        form = -raw[..., 0] ** 2 + np.sum(raw[..., 1:] ** 2, axis=-1)
        bounded &= np.isfinite(form) & (form < 0.0)
        basepoint = np.zeros(vertices.shape[-1])
        basepoint[0] = 1.0
        centers = normalize(np.where(bounded[..., None], raw, basepoint))
        radii = np.where(bounded, np.arcsinh(1.0 / np.sqrt(safe_sigma)), np.inf)
    centers = np.where(bounded[..., None], centers, np.nan)
    return centers, radii
