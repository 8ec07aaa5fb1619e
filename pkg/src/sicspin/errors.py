"""Exception hierarchy shared across the package.

Two broad families matter to callers (and set the CLI exit code):
``ValidationError`` for rejected inputs and ``NumericalError`` for
computations that could not be completed reliably.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "SicspinError",
    "ValidationError",
    "NumericalError",
    "LabelingError",
    "HybridizedStateError",
    "PeakExtractionError",
    "NonIdentifiableError",
    "MatchingError",
]


class SicspinError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(SicspinError, ValueError):
    """Raised when inputs fail validation (bad shapes, unknown labels, ...)."""


class NumericalError(SicspinError, RuntimeError):
    """Raised when a computation cannot produce a trustworthy result."""


class LabelingError(NumericalError):
    """Raised when eigenstates are too strongly mixed to carry product labels."""


class HybridizedStateError(NumericalError):
    """Raised when a requested state pair is hybridized (near a level crossing)
    so that a single nuclear transition cannot be identified."""


class PeakExtractionError(NumericalError):
    """Raised when a doublet splitting cannot be extracted from a spectrum."""


class NonIdentifiableError(NumericalError):
    """Raised when the least-squares problem has a (numerically) singular
    normal matrix.

    Attributes
    ----------
    direction : numpy.ndarray
        Unit vector over the free parameters spanning the flat direction.
    param_names : tuple of str
        Names of the free parameters, aligned with ``direction``.
    """

    def __init__(self, message: str, direction: np.ndarray, param_names: tuple[str, ...]):
        super().__init__(message)
        self.direction = np.asarray(direction, dtype=float)
        self.param_names = tuple(param_names)


class MatchingError(ValidationError):
    """Raised when a measured line cannot be matched to any model transition."""
