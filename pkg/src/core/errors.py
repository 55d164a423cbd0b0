"""Exception hierarchy shared by the geometry kernel, the algorithms and the CLI."""

from __future__ import annotations

from typing import Sequence


class ThickTriError(Exception):
    """Base class for every error raised by thicktri."""


class UsageError(ThickTriError):
    """Invalid arguments: dimension mismatch, out-of-range parameter, bad model point."""


class DegeneracyError(ThickTriError):
    """A simplex or point tuple is affinely dependent (or numerically so)."""

    def __init__(self, message: str, simplex: Sequence[int] | None = None) -> None:
        self.simplex = tuple(simplex) if simplex is not None else None
        if self.simplex is not None:
            message = f"{message} (vertices {self.simplex})"
        super().__init__(message)


class UnboundedCircumsphereError(DegeneracyError):
    """The circumcenter is not timelike: vertices lie near an ideal configuration."""


class BoundDomainError(ThickTriError):
    """An intermediate of a bound formula left its principal domain."""

    def __init__(self, expression: str, value: float) -> None:
        self.expression = expression
        self.value = value
        super().__init__(f"{expression} = {value!r} is outside its domain")


class InfeasibleScheduleError(ThickTriError):
    """No positive d satisfies the volume inequality above the floor."""


class SeparationError(ThickTriError):
    """A point set lost its epsilon-separation."""


class PerturbationError(ThickTriError):
    """Rejection sampling failed to find a position outside every bad region."""

    def __init__(self, vertex_id: int, k: int, trials: int) -> None:
        self.vertex_id = vertex_id
        self.k = k
        self.trials = trials
        super().__init__(
            f"no good position for vertex {vertex_id} at stage k={k} "
            f"after {trials} trials"
        )


class StageAuditError(ThickTriError):
    """A finished perturbation stage left interior simplices that are not good."""

    def __init__(self, k: int, bad: int, d: float) -> None:
        self.k = k
        self.bad = bad
        self.d = d
        super().__init__(
            f"stage k={k} left {bad} interior simplices of dimension <= {k + 1} "
            f"that are not good at d={d:.3e}"
        )


class ArtifactParseError(ThickTriError):
    """Artifact JSON could not be parsed."""

    def __init__(self, path: str, line: int, column: int, reason: str) -> None:
        self.path = path
        self.line = line
        self.column = column
        super().__init__(f"{path}:{line}:{column}: {reason}")


class ArtifactValidationError(ThickTriError):
    """Loaded artifact data violates a model invariant."""

    def __init__(self, invariant: str, detail: str = "") -> None:
        self.invariant = invariant
        message = f"invariant violated: {invariant}"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class StageError(ThickTriError):
    """A pipeline stage failed; wraps the underlying error with the stage name."""

    def __init__(self, stage: str, cause: BaseException) -> None:
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
