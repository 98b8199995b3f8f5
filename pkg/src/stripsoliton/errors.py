"""Exception types shared across the package."""

from __future__ import annotations


class StripSolitonError(Exception):
    """Base class for all package-specific failures."""


class DomainError(StripSolitonError):
    """Evaluation requested outside the domain of a profile or reaper."""


class ProfileError(StripSolitonError):
    """Profile construction failed before producing any usable samples."""


class ConvexityError(StripSolitonError):
    """Boundary function failed its convexity certificate."""


class WidthError(StripSolitonError):
    """Strip too wide for the grim-reaper barrier family.

    Carries the offending width, the half-width limit of the family and
    the maximal admissible width so callers can report actionable
    diagnostics.
    """

    def __init__(self, message: str, m: float, halfwidth: float, max_m: float):
        super().__init__(message)
        self.m = m
        self.halfwidth = halfwidth
        self.max_m = max_m


class SolveFailure(StripSolitonError):
    """Newton iteration did not converge; keeps the residual history."""

    def __init__(self, message: str, residual_history=None):
        super().__init__(message)
        self.residual_history = list(residual_history or [])


class MonotonicityError(StripSolitonError):
    """Perron sweep increased a node beyond tolerance; keeps the trace."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class ConfigError(StripSolitonError):
    """Run configuration rejected; records line and field when known."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field is not None:
            loc.append(f"field '{field}'")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.line = line
        self.field = field
