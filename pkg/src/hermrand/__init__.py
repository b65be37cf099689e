"""Random elements of harmonic-oscillator spectral windows.

Hermite functions and quadrature, spectral windows of H = -Delta + |x|^2,
random sphere measures, weighted norm estimators, Monte-Carlo scaling
experiments and Haar-random eigenbases.
"""

__version__ = "0.1.0"

from .errors import HermRandError
from .hermite import gauss_hermite_rule, hermite_eval, hermite_eval_all
from .spectral import (
    SpectralWindow,
    enumerate_window,
    level_window,
    spectral_function,
    weyl_count,
)
from .measures import RandomLaw, isotropic_profile, normalize_to_sphere, sample_coefficients
from .norms import NormSpec, weighted_norm, sobolev_norm

__all__ = [
    "HermRandError",
    "gauss_hermite_rule",
    "hermite_eval",
    "hermite_eval_all",
    "SpectralWindow",
    "enumerate_window",
    "level_window",
    "spectral_function",
    "weyl_count",
    "RandomLaw",
    "isotropic_profile",
    "normalize_to_sphere",
    "sample_coefficients",
    "NormSpec",
    "weighted_norm",
    "sobolev_norm",
]
