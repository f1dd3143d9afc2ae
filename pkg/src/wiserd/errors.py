"""Exception hierarchy shared by every module of the package."""
from __future__ import annotations


class WiserdError(Exception):
    """Base class."""


class ConfigError(WiserdError):
    """Invalid parameters supplied by a caller or the CLI."""


class ResourceLimitError(WiserdError):
    """A requested computation exceeds the configured resource caps."""


class UncertifiedElementError(WiserdError):
    """Asked for the length of an element that enumeration has not reached."""


class LemmaViolation(WiserdError):
    """A checked geometric statement failed. This should never happen."""


class DevelopmentConflict(WiserdError):
    """Inconsistent gluing while developing the universal cover."""


class ClassificationError(WiserdError):
    """An object matched none of the expected patterns."""


class PreconditionError(WiserdError):
    """An operation was called outside its domain."""


class NonConvergenceError(WiserdError):
    """An iterative solver hit its iteration cap."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class DegenerateDataError(WiserdError):
    """Too few or non-positive data points for a fit."""


class RetractFailure(WiserdError):
    """A triangle produced no valid retraction witness."""
