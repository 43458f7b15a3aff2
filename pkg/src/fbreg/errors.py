"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class FBRegError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(FBRegError):
    """A nonlinearity or parameter set violates a structural assumption."""


class InputError(FBRegError):
    """Malformed or non-finite input data."""


class DomainError(FBRegError):
    """A point, ball or support falls outside the admissible region."""


class NumericError(FBRegError):
    """A numerical procedure failed (non-finite energy, root finder stall)."""


class InsufficientDataError(FBRegError):
    """Too few samples or too narrow a scale range for a fit."""


class PreconditionError(FBRegError):
    """An audit was asked to run where its hypotheses do not hold."""


class ConfigError(FBRegError):
    """Invalid run configuration."""
