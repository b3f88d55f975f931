"""Exception types used across the package."""


class WTFBFError(Exception):
    """Base class for package errors."""


class DomainError(WTFBFError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class QuadratureError(WTFBFError, RuntimeError):
    """Quadrature failed to reach the requested tolerance."""

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class NotPositiveDefiniteError(WTFBFError, RuntimeError):
    """Gram matrix needed more jitter than allowed."""


class GridIndexError(WTFBFError, IndexError):
    """Grid index or offset out of range."""


class LevelTooDeepError(WTFBFError, ValueError):
    """Requested resolution level does not fit the grid."""


class EnsembleMismatchError(WTFBFError, ValueError):
    """Ensemble members disagree in grid, parameters or shape."""


class EstimationError(WTFBFError, ValueError):
    """Regression input is insufficient or degenerate."""


class FormatError(WTFBFError, ValueError):
    """Corrupt or unsupported file content."""
