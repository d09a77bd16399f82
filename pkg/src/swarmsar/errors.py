"""Exception types shared across the package."""
from __future__ import annotations


class SwarmSarError(Exception):
    """Base class for all package errors."""


class RangeError(SwarmSarError):
    """A parameter or override falls outside its allowed range."""


class SceneFormatError(SwarmSarError):
    """A scene document is malformed; message names the offending field."""


class MilValidationError(SwarmSarError):
    """A mission program violates the instruction-language rules."""


class GroundingError(SwarmSarError):
    """Operator input could not be grounded to a valid intent."""

    def __init__(self, message: str, candidates: list[str] | None = None):
        super().__init__(message)
        self.candidates = candidates or []


class IntentFormatError(SwarmSarError):
    """An intention document is malformed."""


class PlanningError(SwarmSarError):
    """Planning failed; carries the partial reasoning trace for audit."""

    def __init__(self, message: str, trace: list | None = None):
        super().__init__(message)
        self.trace = trace or []


class ReasonerUnavailable(SwarmSarError):
    """The remote reasoner endpoint could not be reached."""


class ConfigError(SwarmSarError):
    """Invalid trial or batch configuration."""
