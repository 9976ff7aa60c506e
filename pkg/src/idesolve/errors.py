"""Exception and warning types shared across the package."""

from __future__ import annotations


class IdeSolveError(Exception):
    """Base class for every error raised by :mod:`idesolve`."""


class AmbiguousCase(IdeSolveError):
    """A periodic, drift-free coefficient sits within 1e-9 of n**2 without being declared."""


class DomainError(IdeSolveError):
    pass


class GridMismatch(IdeSolveError):
    pass


class NonRealResult(IdeSolveError):
    """The inverse transform produced an imaginary part above threshold."""


class MissingSpecialValue(IdeSolveError):
    pass


class SolvabilityViolation(IdeSolveError):
    """A required orthogonality condition failed, so the multiplier is unbounded."""

    def __init__(self, message: str, conditions: tuple[str, ...] = ()):
        super().__init__(message)
        self.conditions = conditions


class ConstraintInconsistency(IdeSolveError):
    pass


class NonFiniteValue(IdeSolveError):
    pass


class WitnessedViolation(IdeSolveError):
    """Audit failure carrying the sample that exposed it."""

    def __init__(self, message: str, witness: dict | None = None):
        super().__init__(message)
        self.witness = witness or {}


class LipschitzViolation(WitnessedViolation):
    pass


class GrowthViolation(WitnessedViolation):
    pass


class PeriodicityViolation(WitnessedViolation):
    pass


class ContractionViolation(WitnessedViolation):
    pass


class CertificateFailed(IdeSolveError):
    pass


class NoConvergence(IdeSolveError):
    def __init__(self, message: str, solution=None):
        super().__init__(message)
        self.solution = solution


class GridTooCoarse(IdeSolveError):
    pass


class ConfigError(IdeSolveError):
    """Bad run configuration; ``field`` and ``line`` locate the problem when known."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        where = []
        if field:
            where.append(f"field {field}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.field = field
        self.line = line


class TruncationWarning(UserWarning):
    """A field is not negligible near the edge of the truncated real-line box."""
