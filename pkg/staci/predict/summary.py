"""
Posterior predictive summaries of a particle ensemble.
"""

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..utils.errors import ParameterError, ShapeError

logger = logging.getLogger(__name__)


def _check_alpha(alpha: float) -> float:
    if not 0 < alpha < 1:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    return float(alpha)


@dataclass
class PosteriorSummary:
    """
    Predictive mean, standard deviation and credible bounds per point.

    Attributes:
        mean: Ensemble mean of the field
        sd: Predictive standard deviation, nugget included
        lower: Lower credible bound
        upper: Upper credible bound
        alpha: Miscoverage level of the bounds
    """

    mean: np.ndarray
    sd: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    alpha: float

    def __len__(self) -> int:
        return self.mean.size


def posterior_mean_var(draws: np.ndarray, tau2: float):
    """
    Predictive mean and variance from per-particle field values.

    The variance is the particle spread (second moment minus squared mean)
    plus the nugget estimate.

    Args:
        draws: (M, n) field values, one row per particle
        tau2: Posterior-mean nugget

    Returns:
        (mean, variance) vectors of length n
    """
    draws = np.atleast_2d(np.asarray(draws, dtype=float))
    if tau2 < 0:
        raise ParameterError("tau2 must be non-negative")
    M = draws.shape[0]
    if M == 1:
        warnings.warn("single particle: predictive variance is the nugget only", RuntimeWarning)
        logger.warning("posterior variance from one particle has no epistemic part")
    mean = draws.mean(axis=0)
    spread = np.mean(draws * draws, axis=0) - mean * mean
    return mean, np.clip(spread, 0.0, None) + tau2


def credible_interval(mean, sd, alpha: float):
    """
    Normal credible interval mean +/- z sd with z the 1 - alpha/2 quantile.

    Returns:
        (lower, upper)
    """
    alpha = _check_alpha(alpha)
    mean = np.asarray(mean, dtype=float)
    sd = np.asarray(sd, dtype=float)
    if mean.shape != sd.shape:
        raise ShapeError("mean and sd must have the same shape")
    half = stats.norm.ppf(1.0 - alpha / 2.0) * sd
    return mean - half, mean + half


def summarize_draws(draws: np.ndarray, tau2: float, alpha: float = 0.05) -> PosteriorSummary:
    """Bundle mean, sd and credible bounds."""
    mean, var = posterior_mean_var(draws, tau2)
    sd = np.sqrt(var)
    lower, upper = credible_interval(mean, sd, alpha)
    return PosteriorSummary(mean, sd, lower, upper, alpha)
