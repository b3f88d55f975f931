"""Weighted tensorized fractional Brownian fields: oracles, synthesis, wavelet analysis."""
__version__ = "0.1.0"

from .errors import (DomainError, EnsembleMismatchError, EstimationError, FormatError,
                     GridIndexError, LevelTooDeepError, NotPositiveDefiniteError,
                     QuadratureError, WTFBFError)
from .model import (DEFAULT_QUAD, FieldParams, QuadratureSpec, coeff_variance_exact,
                    covariance, field_variance, increment_variance, kernel,
                    spectral_density_root)
from .meyer import DEFAULT_BANK, MeyerFilterBank
from .synthesis import (FieldRealization, FrequencyGrid, GridSpec, cholesky_synthesize,
                        frequency_grid, simulate_ensemble, spectral_synthesize)
from .hyperbolic import HyperbolicCoeffs, analyze, synthesize
from .besov import BesovSpec

__all__ = [
    "DEFAULT_BANK", "DEFAULT_QUAD", "BesovSpec", "DomainError", "EnsembleMismatchError",
    "EstimationError", "FieldParams", "FieldRealization", "FormatError", "FrequencyGrid",
    "GridIndexError", "GridSpec", "HyperbolicCoeffs", "LevelTooDeepError", "MeyerFilterBank",
    "NotPositiveDefiniteError", "QuadratureError", "QuadratureSpec", "WTFBFError", "analyze",
    "cholesky_synthesize", "coeff_variance_exact", "covariance", "field_variance",
    "frequency_grid", "increment_variance", "kernel", "simulate_ensemble",
    "spectral_density_root", "spectral_synthesize", "synthesize",
]
