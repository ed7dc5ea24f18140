"""
Spectral Module

Random Fourier features for the (dimension-expanded) Matern covariance.

This module provides tools for:
- Sampling frequencies from the Matern spectral density
- Cosine/sine feature maps and their linear readout
- Marginalized feature covariance and its Monte-Carlo verifier
"""

from .features import (
    FrequencySet,
    AmplitudeSet,
    frequency_scale,
    sample_frequencies,
    expanded_inputs,
    rff_features,
    rff_evaluate,
    marginalized_covariance,
    lag_covariance,
)
from .verifier import verify_theorem1, theoretical_moments, default_lag_grid

__all__ = [
    'FrequencySet',
    'AmplitudeSet',
    'frequency_scale',
    'sample_frequencies',
    'expanded_inputs',
    'rff_features',
    'rff_evaluate',
    'marginalized_covariance',
    'lag_covariance',
    'verify_theorem1',
    'theoretical_moments',
    'default_lag_grid',
]
