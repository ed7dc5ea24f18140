"""
Predict Module

This module provides tools for:
- Posterior predictive means, variances and credible intervals
- Neighbour search under the scaled space-time distance
- Local conformal bands and cross-validated neighbour counts
- Leave-one-out field values at the training points
- A predictor object over a trained ensemble
"""

from .calibration import DEFAULT_CANDIDATES, DEFAULT_HOLDOUT, choose_D, interval_scores_by_D
from .conformal import (
    DEFAULT_GRID_SIZE,
    ConformalBand,
    conformal_bands,
    conformal_interval,
    conformal_rank,
    conformity_scores,
    plausibility,
)
from .loo import loo_draws, particle_leverage
from .neighbors import BRUTE_FORCE_BELOW, NeighborIndex, neighbor_select
from .predictor import CALIBRATIONS, PREDICTION_COLUMNS, StaciPredictor
from .summary import PosteriorSummary, credible_interval, posterior_mean_var, summarize_draws

__all__ = [
    'DEFAULT_CANDIDATES',
    'DEFAULT_HOLDOUT',
    'choose_D',
    'interval_scores_by_D',
    'DEFAULT_GRID_SIZE',
    'ConformalBand',
    'conformal_bands',
    'conformal_interval',
    'conformal_rank',
    'conformity_scores',
    'plausibility',
    'loo_draws',
    'particle_leverage',
    'BRUTE_FORCE_BELOW',
    'NeighborIndex',
    'neighbor_select',
    'CALIBRATIONS',
    'PREDICTION_COLUMNS',
    'StaciPredictor',
    'PosteriorSummary',
    'credible_interval',
    'posterior_mean_var',
    'summarize_draws',
]
