"""Exception types shared across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """A point or interval lies outside where an operation is defined."""


class ValidationError(ValueError):
    """A descriptor or parameter set violates its invariants.

    ``field`` names the offending entry (a dotted path for JSON input, or a
    parameter name), so callers can report it in one line.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class StabilizationError(RuntimeError):
    """A truncated computation did not settle under repeated domain doubling."""
