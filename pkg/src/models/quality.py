"""Quality parameter ledger, bound ledger and certification report models."""

from __future__ import annotations

import math
from enum import Enum
from typing import Optional

from pydantic import BaseModel, Field, model_validator

_REL_TOL = 1e-12


def _close(x: float, y: float) -> bool:
    return math.isclose(x, y, rel_tol=_REL_TOL, abs_tol=0.0)


class QualityParams(BaseModel):
    """
    Parameter ledger of a run.

    Window constants: a = eps - 2 delta, b = 2 eps + 2 delta, c = eps + delta.
    Stage radii: delta_k[k] = delta / (100 * 2^k) for k = 3..n.
    Altitude schedule d[k] for k = 2..n is non-increasing and positive.
    """

    n: int = Field(..., ge=2, description="Dimension of H^n")
    mu: float = Field(..., gt=0.0, description="Thickness parameter")
    epsilon: float = Field(..., gt=0.0, description="Net separation, mu/100 by default")
    delta: float = Field(..., gt=0.0, description="Perturbation budget, eps/10 by default")
    a: float = Field(..., gt=0.0, description="Shortest admissible edge")
    b: float = Field(..., gt=0.0, description="Longest admissible edge")
    c: float = Field(..., gt=0.0, description="Largest admissible circumradius")
    d: dict[int, float] = Field(
        default_factory=dict, description="Altitude lower bounds d_k, k = 2..n"
    )
    delta_k: dict[int, float] = Field(
        default_factory=dict, description="Stage perturbation radii delta_k, k = 3..n"
    )

    @model_validator(mode="after")
    def validate_ledger(self) -> QualityParams:
        eps, delta = self.epsilon, self.delta
        if not delta < eps / 2.0:
            raise ValueError("delta must be below epsilon/2 so that a > 0")
        if not _close(self.a, eps - 2.0 * delta):
            raise ValueError("a must equal epsilon - 2 delta")
        if not _close(self.b, 2.0 * eps + 2.0 * delta):
            raise ValueError("b must equal 2 epsilon + 2 delta")
        if not _close(self.c, eps + delta):
            raise ValueError("c must equal epsilon + delta")
        for k, radius in self.delta_k.items():
            if not _close(radius, delta / (100.0 * 2.0**k)):
                raise ValueError(f"delta_k[{k}] must equal delta / (100 * 2^{k})")
        previous = math.inf
        for k in sorted(self.d):
            if not 2 <= k <= self.n:
                raise ValueError(f"d schedule key {k} outside 2..n")
            if not 0.0 < self.d[k] <= previous:
                raise ValueError("d schedule must be positive and non-increasing")
            previous = self.d[k]
        return self

    @classmethod
    def from_mu(
        cls,
        n: int,
        mu: float,
        epsilon: Optional[float] = None,
        delta: Optional[float] = None,
        d: Optional[dict[int, float]] = None,
    ) -> QualityParams:
        eps = mu / 100.0 if epsilon is None else epsilon
        dlt = eps / 10.0 if delta is None else delta
        return cls(
            n=n,
            mu=mu,
            epsilon=eps,
            delta=dlt,
            a=eps - 2.0 * dlt,
            b=2.0 * eps + 2.0 * dlt,
            c=eps + dlt,
            d=dict(d or {}),
            delta_k={k: dlt / (100.0 * 2.0**k) for k in range(3, n + 1)},
        )


class BadnessKind(str, Enum):
    """
    Why a simplex fails (a, b, d)-goodness.

    Values:
        SHORT_EDGE: some edge shorter than a
        LONG_EDGE: some edge longer than b
        LARGE_CIRCUMRADIUS: edges in range but circumradius above c (or unbounded)
        LOW_ALTITUDE: edges and circumradius in range, some altitude below d (sliver)
    """

    SHORT_EDGE = "short_edge"
    LONG_EDGE = "long_edge"
    LARGE_CIRCUMRADIUS = "large_circumradius"
    LOW_ALTITUDE = "low_altitude"


class SimplexRecord(BaseModel):
    """Per-cell certification diagnostics."""

    vertices: list[int] = Field(..., min_length=2, description="Sorted vertex ids")
    edges: list[float] = Field(..., description="Sorted edge lengths")
    circumradius: Optional[float] = Field(
        None, description="Circumradius, None when the circumsphere is unbounded"
    )
    min_altitude: float = Field(..., ge=0.0)
    good: bool
    badness: Optional[BadnessKind] = None
    min_dihedral: Optional[float] = Field(None, description="Smallest dihedral angle")
    bilipschitz: Optional[float] = Field(None, ge=1.0)


class Histogram(BaseModel):
    bin_edges: list[float] = Field(default_factory=list)
    counts: list[int] = Field(default_factory=list)


class CertReport(BaseModel):
    """
    Thickness certificate of a complex.

    passed holds iff every interior top cell is (a, b, d)-good at the checked d.
    """

    n: int = Field(..., ge=2)
    params: QualityParams
    achieved_d: dict[int, float] = Field(..., description="Achieved d per dimension")
    d_checked: float = Field(..., gt=0.0, description="d the interior cells were audited at")
    passed: bool
    vacuous: bool = Field(False, description="No interior cell was present")
    interior_cells: int = Field(..., ge=0)
    good_cells: int = Field(..., ge=0)
    failed_cells: list[list[int]] = Field(default_factory=list)
    window_violations: int = Field(
        0, ge=0, description="Interior cells with edges outside [a, b] or circumradius > c"
    )
    L_estimate: float = Field(..., ge=1.0, description="Estimated bilipschitz constant")
    grid_depth: int = Field(..., ge=1, description="Barycentric sample grid depth")
    max_displacement: Optional[float] = Field(
        None, description="Largest vertex displacement from the original net"
    )
    altitude_histogram: Histogram = Field(default_factory=Histogram)
    dihedral_histogram: Histogram = Field(default_factory=Histogram)
    records: list[SimplexRecord] = Field(default_factory=list)
    warnings: list[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def validate_verdict(self) -> CertReport:
        all_good = all(record.good for record in self.records)
        if self.passed != all_good:
            raise ValueError("passed must hold iff every interior record is good")
        if self.good_cells > self.interior_cells:
            raise ValueError("good_cells cannot exceed interior_cells")
        return self


class BoundLedger(BaseModel):
    """
    Every named constant of the quality argument for one (n, mu).

    D, R and the V_l are evaluated at d0 = d_2 and d = d_eval (the last
    schedule entry).
    """

    n: int = Field(..., ge=2)
    mu: float = Field(..., gt=0.0)
    params: QualityParams
    d0: float = Field(..., gt=0.0)
    d_eval: float = Field(..., gt=0.0)
    D: float = Field(..., ge=0.0)
    alpha0: float = Field(..., gt=0.0, le=math.pi / 2 + 1e-12)
    R: float = Field(..., ge=0.0)
    Vk: dict[int, float] = Field(..., description="V_l for l = 1..n")
    m: int = Field(..., ge=1)
    N: dict[int, int] = Field(..., description="N(n, k, mu) for k = 1..n")
    h1: float = Field(..., gt=0.0)
    h0: float = Field(..., gt=0.0)
    d_schedule: dict[int, float] = Field(..., description="Theoretical d_k, k = 2..n")
    monotone_in_d: bool = Field(
        ..., description="D, R and V_l shrink with d on the check grid"
    )
