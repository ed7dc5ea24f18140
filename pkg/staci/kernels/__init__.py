"""
Kernels Module

Stationary and dimension-expanded Matern covariances and the exact GP oracle.

This module provides tools for:
- Matern correlation with half-integer closed forms
- Anisotropic space-time and latent-expanded distances
- Exact simulation and kriging for small problems
"""

from .matern import (
    CovarianceParams,
    STPoint,
    as_coords,
    responses,
    matern_correlation,
    st_distance,
    st_distance_matrix,
    expanded_distance,
    expanded_distance_matrix,
    matern_covariance,
)
from .exact_gp import ExactGP, exact_gp_simulate, exact_gp_predict

__all__ = [
    'CovarianceParams',
    'STPoint',
    'as_coords',
    'responses',
    'matern_correlation',
    'st_distance',
    'st_distance_matrix',
    'expanded_distance',
    'expanded_distance_matrix',
    'matern_covariance',
    'ExactGP',
    'exact_gp_simulate',
    'exact_gp_predict',
]
