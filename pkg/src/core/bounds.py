"""Explicit constants of the quality argument and the d_k schedule.

All functions are pure. alpha0 is the only one without a closed form and is
cached per (a, c).
"""

from __future__ import annotations

import logging
import math
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import optimize

from src.models.quality import BoundLedger, QualityParams

from .config import settings
from .errors import BoundDomainError, InfeasibleScheduleError, UsageError
from .hyperbolic import annulus_volume, ball_volume, sample_ball
from .quality import in_bad_region_batch
from .telemetry import annotate_span, trace_operation

logger = logging.getLogger(__name__)

_MC_CHUNK = 20_000


def d_bound(b: float, d0: float, d: float) -> float:
    """asinh(sinh(d) * sinh(b) / sinh(d0)): altitude spread forced by one low altitude."""
    if b <= 0.0 or d0 <= 0.0 or d < 0.0:
        raise UsageError("d_bound needs b, d0 > 0 and d >= 0")
    return math.asinh(math.sinh(d) * math.sinh(b) / math.sinh(d0))


def _chord_angle(rho: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Angle between a chord of half-length s and the circle of radius rho it cuts."""
    return np.arcsin(np.clip(np.tanh(s) / np.tanh(rho), 0.0, 1.0))


@lru_cache(maxsize=64)
def alpha0(a: float, c: float) -> float:
    """
    Smallest chord-tangent angle over circles of radius rho in [a/2, c] cut by
    chords of half-length s in [a/2, rho].

    Grid search over the parameter rectangle refined with L-BFGS-B.
    """
    if not 0.0 < a / 2.0 <= c:
        raise UsageError(f"alpha0 needs 0 < a/2 <= c, got a={a}, c={c}")
    low = a / 2.0

    def angle(u: np.ndarray, v: np.ndarray) -> np.ndarray:
        rho = low + u * (c - low)
        s = low + v * (rho - low)
        return _chord_angle(rho, s)

    axis = np.linspace(0.0, 1.0, settings.alpha0_grid)
    uu, vv = np.meshgrid(axis, axis, indexing="ij")
    values = angle(uu, vv)
    best = np.unravel_index(int(np.argmin(values)), values.shape)
    start = np.array([axis[best[0]], axis[best[1]]])
    refined = optimize.minimize(
        lambda x: float(angle(np.asarray(x[0]), np.asarray(x[1]))),
        start,
        method="L-BFGS-B",
        bounds=[(0.0, 1.0), (0.0, 1.0)],
    )
    result = min(float(values[best]), float(refined.fun))
    return max(result, np.finfo(float).tiny)


def r_bound(a: float, b: float, c: float, d0: float, d: float) -> float:
    """D + asinh(sinh(D) / sin(alpha0)): distance from a low vertex to the facet circumsphere."""
    big_d = d_bound(b, d0, d)
    return big_d + math.asinh(math.sinh(big_d) / math.sin(alpha0(a, c)))


def vk_bound(n: int, k: int, a: float, b: float, c: float, d0: float, d: float) -> float:
    """Volume of the r_bound-neighbourhood of a radius-c sphere, as a shell about its center."""
    if not 1 <= k <= n:
        raise UsageError(f"vk_bound needs 1 <= k <= n, got k={k}, n={n}")
    return annulus_volume(n, c, r_bound(a, b, c, d0, d))


def _net_radii(
    mu: float, epsilon: Optional[float], delta: Optional[float]
) -> tuple[float, float]:
    eps = mu / 100.0 if epsilon is None else epsilon
    dlt = eps / 10.0 if delta is None else delta
    return eps, dlt


def m_count(
    n: int, mu: float, epsilon: Optional[float] = None, delta: Optional[float] = None
) -> int:
    """Largest number of net points in a ball of radius 2 eps + 2 delta."""
    if mu <= 0.0:
        raise UsageError("mu must be positive")
    eps, dlt = _net_radii(mu, epsilon, delta)
    if not dlt < eps / 2.0:
        raise UsageError("delta must be below epsilon/2")
    ratio = ball_volume(n, 2.0 * eps + 2.0 * dlt) / ball_volume(n, eps / 2.0 - dlt)
    return int(math.floor(ratio))


def n_count(
    n: int,
    k: int,
    mu: float,
    epsilon: Optional[float] = None,
    delta: Optional[float] = None,
) -> int:
    """Binomial(m, k): bound on the number of k-vertex tuples near one point."""
    if k < 1:
        raise UsageError("n_count needs k >= 1")
    return math.comb(m_count(n, mu, epsilon, delta), k)


def h1_bound(a: float, r0: float) -> float:
    """Altitude lower bound for a triangle with an edge of length a inscribed in radius r0."""
    if a <= 0.0 or r0 <= 0.0:
        raise UsageError("h1_bound needs a, r0 > 0")
    cos_alpha = (math.cosh(a) * math.cosh(r0) - math.cosh(r0)) / (
        math.sinh(a) * math.sinh(r0)
    )
    if not -1.0 <= cos_alpha <= 1.0:
        raise BoundDomainError("cos(alpha)", cos_alpha)
    sin_alpha = math.sqrt(1.0 - cos_alpha * cos_alpha)
    q = math.asinh(math.sinh(a) * sin_alpha)
    cosh_h1 = math.cosh(a) * math.cosh(q) - math.sinh(a) * math.sinh(q)
    if cosh_h1 < 1.0 - settings.representation_tolerance:
        raise BoundDomainError("cosh(h1)", cosh_h1)
    # cosh(h1) = cosh(a - q); the difference keeps precision for small h1
    return a - q


def h0_bound(a: float, b: float, r: float) -> float:
    """asinh(sinh(a) / sinh(b) * sinh(h1(a, r))): triangle altitude floor."""
    if not 0.0 < a <= b:
        raise UsageError(f"h0_bound needs 0 < a <= b, got a={a}, b={b}")
    return math.asinh(math.sinh(a) / math.sinh(b) * math.sinh(h1_bound(a, r)))


def schedule_load(params: QualityParams, k: int, d: float, d0: float) -> float:
    """Left side of the stage-k volume inequality: sum over l of V_l * N_l."""
    n = params.n
    shell = vk_bound(n, k + 1, params.a, params.b, params.c, d0, d)
    tuples = sum(
        n_count(n, size, params.mu, params.epsilon, params.delta)
        for size in range(1, k + 2)
    )
    return shell * tuples


def schedule_budget(params: QualityParams, k: int) -> float:
    """Right side of the stage-k inequality: volume of B(delta_{k+1})."""
    return ball_volume(params.n, params.delta_k[k + 1])


@trace_operation("bounds", "solve_d_schedule")
def solve_d_schedule(
    n: int, mu: float, params: Optional[QualityParams] = None
) -> dict[int, float]:
    """
    Theoretical altitude bounds d_2 >= ... >= d_n.

    d_2 = h0_bound(a, b, c); each d_{k+1} is the largest value not above d_k
    satisfying the stage-k volume inequality, found by bisection on log d.
    """
    params = params if params is not None else QualityParams.from_mu(n, mu)
    d2 = h0_bound(params.a, params.b, params.c)
    schedule = {2: d2}
    floor = settings.schedule_floor
    tolerance = math.log1p(settings.schedule_rel_tol)
    for k in range(2, n):
        previous = schedule[k]
        budget = schedule_budget(params, k)
        if schedule_load(params, k, previous, d2) <= budget:
            schedule[k + 1] = previous
            continue
        if schedule_load(params, k, floor, d2) > budget:
            raise InfeasibleScheduleError(
                f"no d above {floor:g} satisfies the stage {k} volume inequality"
            )
        low, high = math.log(floor), math.log(previous)
        while high - low > tolerance:
            middle = 0.5 * (low + high)
            if schedule_load(params, k, math.exp(middle), d2) <= budget:
                low = middle
            else:
                high = middle
        schedule[k + 1] = math.exp(low)
        logger.debug("d_%d = %.6e", k + 1, schedule[k + 1])
    annotate_span(n=n, mu=mu, d_final=schedule[n])
    return schedule


def quality_params(n: int, mu: float) -> QualityParams:
    """Parameter ledger with the theoretical d schedule filled in."""
    base = QualityParams.from_mu(n, mu)
    return QualityParams.from_mu(n, mu, d=solve_d_schedule(n, mu, base))


def _monotone_in_d(params: QualityParams, d0: float, d_eval: float) -> bool:
    grid = [d_eval * factor for factor in (1e-3, 1e-2, 1e-1, 1.0)]
    series = [
        [d_bound(params.b, d0, d) for d in grid],
        [r_bound(params.a, params.b, params.c, d0, d) for d in grid],
    ] + [
        [vk_bound(params.n, dim, params.a, params.b, params.c, d0, d) for d in grid]
        for dim in range(1, params.n + 1)
    ]
    return all(
        all(later >= earlier for earlier, later in zip(values, values[1:]))
        for values in series
    )


@trace_operation("bounds", "build_ledger")
def build_ledger(n: int, mu: float) -> BoundLedger:
    """Every constant for (n, mu), evaluated at d0 = d_2 and d = d_n."""
    params = quality_params(n, mu)
    d0, d_eval = params.d[2], params.d[n]
    a, b, c = params.a, params.b, params.c
    ledger = BoundLedger(
        n=n,
        mu=mu,
        params=params,
        d0=d0,
        d_eval=d_eval,
        D=d_bound(b, d0, d_eval),
        alpha0=alpha0(a, c),
        R=r_bound(a, b, c, d0, d_eval),
        Vk={dim: vk_bound(n, dim, a, b, c, d0, d_eval) for dim in range(1, n + 1)},
        m=m_count(n, mu, params.epsilon, params.delta),
        N={k: n_count(n, k, mu, params.epsilon, params.delta) for k in range(1, n + 1)},
        h1=h1_bound(a, c),
        h0=h0_bound(a, b, c),
        d_schedule=dict(params.d),
        monotone_in_d=_monotone_in_d(params, d0, d_eval),
    )
    logger.info("✅ bound ledger for n=%d, mu=%g: d_n = %.3e", n, mu, d_eval)
    return ledger


def bad_region_volume_mc(
    facet: np.ndarray,
    a: float,
    b: float,
    c: float,
    d: float,
    samples: Optional[int] = None,
    seed: int = 0,
) -> tuple[float, float]:
    """
    Monte Carlo estimate and standard error of the bad-region volume of a facet.

    Bad positions are within b of every facet vertex, so samples are drawn
    uniformly from B(facet[0], b).
    """
    vertices = np.atleast_2d(np.asarray(facet, dtype=float))
    n = vertices.shape[1] - 1
    total = settings.monte_carlo_samples if samples is None else samples
    if total <= 0:
        raise UsageError("samples must be positive")
    rng = np.random.default_rng(seed)
    hits, drawn = 0, 0
    while drawn < total:
        count = min(_MC_CHUNK, total - drawn)
        points = sample_ball(vertices[0], b, count, rng)
        hits += int(np.count_nonzero(in_bad_region_batch(points, vertices, a, b, c, d)))
        drawn += count
    volume = ball_volume(n, b)
    fraction = hits / total
    error = volume * math.sqrt(fraction * (1.0 - fraction) / total)
    return volume * fraction, error
