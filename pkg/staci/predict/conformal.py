"""
Local Space-Time Conformal Bands

Each query is calibrated against its nearest training neighbours. With
neighbour scores delta_j = |y_j - mean_j| / sd_j, a candidate y enters the
band when its plausibility

    p(y) = (1 + #{j : delta_j >= |y - mean_q| / sd_q}) / (K + 1)

exceeds alpha. The band is then mean_q +/- q sd_q with q the
ceil((1 - alpha)(K + 1))-th smallest neighbour score. When that rank exceeds
K every y is plausible and the band falls back to the neighbour response range.
"""

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..utils.errors import ParameterError, ShapeError
from .summary import _check_alpha

logger = logging.getLogger(__name__)

DEFAULT_GRID_SIZE = 2001


@dataclass
class ConformalBand:
    """
    Calibrated interval at one query.

    Attributes:
        lower: Lower bound
        upper: Upper bound
        q: Score multiplier (nan when the fallback band is used)
        K: Neighbour count
        fallback: True when K is too small for the requested level
    """

    lower: float
    upper: float
    q: float
    K: int
    fallback: bool = False

    @property
    def width(self) -> float:
        return self.upper - self.lower


def conformity_scores(y, mean, sd) -> np.ndarray:
    """Standardized absolute residuals |y - mean| / sd."""
    y, mean, sd = (np.asarray(v, dtype=float) for v in (y, mean, sd))
    if np.any(sd <= 0):
        raise ParameterError("predictive sd must be positive")
    return np.abs(y - mean) / sd


def conformal_rank(K: int, alpha: float) -> int:
    """1-based rank ceil((1 - alpha)(K + 1)) of the selected neighbour score."""
    # rounding guard so exact products such as 0.95 * 20 stay integral
    return int(math.ceil(round((1.0 - alpha) * (K + 1), 9)))


def plausibility(y_candidates, mean_q: float, sd_q: float, scores: np.ndarray) -> np.ndarray:
    """
    Conformal p-value of each candidate response.

    Args:
        y_candidates: Candidate values
        mean_q, sd_q: Predictive mean and sd at the query
        scores: Neighbour conformity scores

    Returns:
        p(y) for each candidate
    """
    if sd_q <= 0:
        raise ParameterError("predictive sd must be positive")
    delta = np.abs(np.asarray(y_candidates, dtype=float) - mean_q) / sd_q
    ranked = np.sort(scores)
    at_least = scores.size - np.searchsorted(ranked, delta, side="left")
    return (1.0 + at_least) / (scores.size + 1.0)


def _fallback(mean_q: float, nb_y: np.ndarray, K: int) -> ConformalBand:
    warnings.warn(f"{K} neighbours are too few for the requested level; "
                  "using the neighbour response range", RuntimeWarning)
    logger.warning("conformal fallback band with K=%d", K)
    return ConformalBand(float(min(nb_y.min(), mean_q)), float(max(nb_y.max(), mean_q)),
                         float("nan"), K, True)


def conformal_interval(mean_q: float, sd_q: float, nb_y, nb_mean, nb_sd, alpha: float,
                       mode: str = "closed", grid_size: int = DEFAULT_GRID_SIZE) -> ConformalBand:
    """
    Conformal band at one query from its neighbours.

    Args:
        mean_q: Predictive mean at the query
        sd_q: Predictive sd at the query
        nb_y: Neighbour responses
        nb_mean: Predictive means at the neighbours
        nb_sd: Predictive sds at the neighbours
        alpha: Miscoverage level
        mode: 'closed' for the order-statistic form, 'grid' for a search over
            ``grid_size`` values spanning the neighbour responses
        grid_size: Grid resolution in grid mode

    Returns:
        ConformalBand
    """
    alpha = _check_alpha(alpha)
    nb_y = np.asarray(nb_y, dtype=float).ravel()
    scores = conformity_scores(nb_y, nb_mean, nb_sd).ravel()
    K = scores.size
    if K == 0:
        raise ParameterError("at least one neighbour is required")
    if sd_q <= 0:
        raise ParameterError("predictive sd must be positive")

    if mode == "grid":
        grid = np.linspace(nb_y.min(), nb_y.max(), grid_size)
        keep = grid[plausibility(grid, mean_q, sd_q, scores) > alpha]
        if keep.size == 0:
            return ConformalBand(float(mean_q), float(mean_q), 0.0, K)
        q = max(abs(keep[0] - mean_q), abs(keep[-1] - mean_q)) / sd_q
        return ConformalBand(float(keep[0]), float(keep[-1]), float(q), K)
    if mode != "closed":
        raise ParameterError(f"mode must be 'closed' or 'grid', got {mode!r}")

    rank = conformal_rank(K, alpha)
    if rank > K:
        return _fallback(mean_q, nb_y, K)
    q = float(np.partition(scores, rank - 1)[rank - 1])
    return ConformalBand(float(mean_q - q * sd_q), float(mean_q + q * sd_q), q, K)


def conformal_bands(mean_q, sd_q, neighbors: np.ndarray, train_y, train_mean, train_sd,
                    alpha: float):
    """
    Closed-form bands for many queries at once.

    Args:
        mean_q, sd_q: Predictive mean and sd at the queries
        neighbors: (n_queries, K) training indices
        train_y, train_mean, train_sd: Training responses and their predictive summaries
        alpha: Miscoverage level

    Returns:
        (lower, upper, q, fallback) arrays over the queries
    """
    alpha = _check_alpha(alpha)
    mean_q = np.asarray(mean_q, dtype=float).ravel()
    sd_q = np.asarray(sd_q, dtype=float).ravel()
    neighbors = np.atleast_2d(neighbors)
    if neighbors.shape[0] != mean_q.size or sd_q.size != mean_q.size:
        raise ShapeError("one neighbour row, mean and sd per query required")
    train_y = np.asarray(train_y, dtype=float)
    scores = conformity_scores(train_y, train_mean, train_sd)[neighbors]
    K = neighbors.shape[1]
    rank = conformal_rank(K, alpha)
    if rank > K:
        warnings.warn(f"{K} neighbours are too few for the requested level; "
                      "using the neighbour response range", RuntimeWarning)
        logger.warning("conformal fallback bands with K=%d", K)
        nb_y = train_y[neighbors]
        lower = np.minimum(nb_y.min(axis=1), mean_q)
        upper = np.maximum(nb_y.max(axis=1), mean_q)
        return lower, upper, np.full(mean_q.size, np.nan), np.ones(mean_q.size, dtype=bool)
    q = np.partition(scores, rank - 1, axis=1)[:, rank - 1]
    return mean_q - q * sd_q, mean_q + q * sd_q, q, np.zeros(mean_q.size, dtype=bool)
