"""
Metrics Module

This module provides tools for:
- RMSE, Gaussian NLL and closed-form Gaussian CRPS
- Interval score, coverage and mean width
- Evaluation reports as CSV and text
"""

from .report import EvalReport, evaluate, reports_frame, write_reports
from .scores import (
    NLL_MODES,
    coverage_and_width,
    crps_gaussian,
    gaussian_nll,
    interval_score,
    rmse,
)

__all__ = [
    'EvalReport',
    'evaluate',
    'reports_frame',
    'write_reports',
    'NLL_MODES',
    'coverage_and_width',
    'crps_gaussian',
    'gaussian_nll',
    'interval_score',
    'rmse',
]
