"""Exception hierarchy shared by the library, the CLI and the service."""
from typing import Optional

import numpy as np


class AveError(Exception):
    """Base class for every error raised by avecert."""


class InvalidMatrix(AveError):
    """Matrix data is empty or contains NaN/Inf entries."""


class DimensionMismatch(AveError):
    """Operands have inconsistent shapes."""


class DimensionOverflow(AveError):
    """A lift or an enumeration would exceed its configured cap."""

    def __init__(self, what: str, requested: int, cap: int):
        self.what = what
        self.requested = requested
        self.cap = cap
        super().__init__(f"{what}: {requested} exceeds cap {cap}")


class SingularMatrix(AveError):
    """An invertibility hypothesis failed."""

    def __init__(self, name: str = "matrix", pivot: Optional[float] = None):
        self.name = name
        self.pivot = pivot
        detail = f" (smallest pivot {pivot:.3e})" if pivot is not None else ""
        super().__init__(f"{name} is singular{detail}")


class NonConvergence(AveError):
    """An iteration reached its cap without meeting its tolerance."""

    def __init__(
        self,
        message: str,
        last_iterate: Optional[np.ndarray] = None,
        residual: Optional[float] = None,
        iterations: Optional[int] = None,
        column: Optional[int] = None,
    ):
        self.last_iterate = last_iterate
        self.residual = residual
        self.iterations = iterations
        self.column = column
        if column is not None:
            message = f"column {column}: {message}"
        super().__init__(message)


class ParseError(AveError):
    """An instance file or bundle could not be read."""


class MissingRightHandSide(AveError):
    """The operation needs F (or f) but the instance was given without it."""


class GenerationFailure(AveError):
    """Random instance generation gave up after too many resamples."""

    def __init__(self, attempts: int, reason: str):
        self.attempts = attempts
        super().__init__(f"gave up after {attempts} attempts: {reason}")
