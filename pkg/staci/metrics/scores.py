"""
Point and probabilistic verification scores.
"""

from typing import Tuple

import numpy as np
from scipy import stats

from ..utils.errors import ParameterError, ShapeError

NLL_MODES = ("pointwise", "literal")


def _vectors(*arrays) -> Tuple[np.ndarray, ...]:
    out = tuple(np.asarray(a, dtype=float).ravel() for a in arrays)
    n = out[0].size
    if n == 0:
        raise ParameterError("metrics need at least one observation")
    if any(a.size != n for a in out):
        raise ShapeError("inputs must have equal lengths")
    return out


def _positive_sd(sd: np.ndarray):
    if np.any(~(sd > 0)):
        raise ParameterError("predictive sd must be positive")


def rmse(y, yhat) -> float:
    """Root mean squared error."""
    y, yhat = _vectors(y, yhat)
    return float(np.sqrt(np.mean((y - yhat) ** 2)))


def gaussian_nll(y, yhat, sd, mode: str = "pointwise") -> float:
    """
    Gaussian negative log likelihood per observation, 2 pi omitted.

    Args:
        y: Observations
        yhat: Predictive means
        sd: Predictive standard deviations
        mode: 'pointwise' averages 1/2 log sd_i^2 + r_i^2 / (2 sd_i^2);
            'literal' uses a pooled sd_bar = sqrt(mean sd_i^2) and averages
            1/2 log sd_bar + r_i^2 / (2 sd_bar)

    Returns:
        Mean NLL
    """
    y, yhat, sd = _vectors(y, yhat, sd)
    _positive_sd(sd)
    r2 = (y - yhat) ** 2
    if mode == "pointwise":
        var = sd * sd
        return float(np.mean(0.5 * np.log(var) + r2 / (2.0 * var)))
    if mode == "literal":
        pooled = np.sqrt(np.mean(sd * sd))
        return float(0.5 * np.log(pooled) + np.mean(r2) / (2.0 * pooled))
    raise ParameterError(f"mode must be one of {NLL_MODES}, got {mode!r}")


def crps_gaussian(y, yhat, sd) -> float:
    """
    Mean closed-form CRPS of normal predictive distributions,
    sd [z (2 Phi(z) - 1) + 2 phi(z) - 1/sqrt(pi)] with z = (y - yhat) / sd.
    """
    y, yhat, sd = _vectors(y, yhat, sd)
    _positive_sd(sd)
    z = (y - yhat) / sd
    values = sd * (z * (2.0 * stats.norm.cdf(z) - 1.0) + 2.0 * stats.norm.pdf(z)
                   - 1.0 / np.sqrt(np.pi))
    return float(np.mean(values))


def interval_score(y, lower, upper, alpha: float) -> float:
    """
    Mean interval score (U - L) + (2/alpha)(L - y)_+ + (2/alpha)(y - U)_+.
    """
    if not 0 < alpha < 1:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    y, lower, upper = _vectors(y, lower, upper)
    if np.any(lower > upper):
        raise ParameterError("lower bounds must not exceed upper bounds")
    below = np.clip(lower - y, 0.0, None)
    above = np.clip(y - upper, 0.0, None)
    return float(np.mean((upper - lower) + (2.0 / alpha) * (below + above)))


def coverage_and_width(y, lower, upper) -> Tuple[float, float]:
    """
    Fraction of observations inside the closed intervals, and mean width.
    """
    y, lower, upper = _vectors(y, lower, upper)
    inside = (y >= lower) & (y <= upper)
    return float(np.mean(inside)), float(np.mean(upper - lower))
