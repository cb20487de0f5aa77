"""
Exception hierarchy
"""

from typing import Optional, Tuple


class BellError(Exception):
    """Base class for all bellrand errors."""


class ValidationError(BellError, ValueError):
    """Input is malformed, infeasible or violates a model constraint."""


class InsufficientTrialsError(ValidationError):
    """A count-ratio denominator is zero."""

    def __init__(self, setting: Optional[Tuple[int, int]], message: str = ""):
        self.setting = setting
        if not message:
            message = f"insufficient trials for setting {setting}"
        super().__init__(message)


class ComputationError(BellError, RuntimeError):
    """A numerical procedure failed (infeasible LP, exhausted search budget)."""
