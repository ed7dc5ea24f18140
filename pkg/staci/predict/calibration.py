"""
Cross-validated choice of the conformal neighbour count.
"""

import logging
from typing import Sequence

import numpy as np
import pandas as pd

from ..metrics.scores import interval_score
from ..utils.errors import ParameterError
from .conformal import conformal_bands
from .neighbors import NeighborIndex

logger = logging.getLogger(__name__)

DEFAULT_CANDIDATES = (30, 40, 50, 60, 70, 80)
DEFAULT_HOLDOUT = 100


def interval_scores_by_D(train, y, mean, sd, rho_s: float, rho_t: float,
                         candidates: Sequence[int] = DEFAULT_CANDIDATES, alpha: float = 0.05,
                         seed: int = 0, n_holdout: int = DEFAULT_HOLDOUT) -> pd.Series:
    """
    Held-out interval score of the conformal bands for each neighbour count.

    Each held-out point is calibrated against its nearest other training
    points. Candidates needing more neighbours than exist are dropped.

    Args:
        train: Training coordinates or STPoints
        y: Training responses
        mean, sd: Predictive summaries at the training points
        rho_s, rho_t: Range estimates for the neighbour search
        candidates: Neighbour counts to try
        alpha: Miscoverage level
        seed: Seed for the held-out subset
        n_holdout: Number of held-out locations

    Returns:
        Mean interval scores indexed by D, in increasing D
    """
    candidates = sorted({int(c) for c in candidates})
    if not candidates:
        raise ParameterError("at least one candidate D is required")
    index = NeighborIndex(train, rho_s, rho_t)
    usable = [c for c in candidates if c + 1 <= index.n]
    if not usable:
        raise ParameterError(f"every candidate exceeds the {index.n - 1} available neighbours")
    y = np.asarray(y, dtype=float)
    mean = np.asarray(mean, dtype=float)
    sd = np.asarray(sd, dtype=float)

    rng = np.random.default_rng(seed)
    held = rng.choice(index.n, size=min(n_holdout, index.n), replace=False)
    nearest = index.query(index.coords[held], max(usable) + 1)

    scores = {}
    for D in usable:
        rows = np.empty((held.size, D), dtype=int)
        for r, (i, row) in enumerate(zip(held, nearest)):
            rows[r] = row[row != i][:D]
        lower, upper, _, _ = conformal_bands(mean[held], sd[held], rows, y, mean, sd, alpha)
        scores[D] = interval_score(y[held], lower, upper, alpha)
        logger.debug("D=%d interval score %.6g", D, scores[D])
    return pd.Series(scores, name="interval_score").rename_axis("D")


def choose_D(train, y, mean, sd, rho_s: float, rho_t: float,
             candidates: Sequence[int] = DEFAULT_CANDIDATES, alpha: float = 0.05,
             seed: int = 0, n_holdout: int = DEFAULT_HOLDOUT) -> int:
    """
    Pick the neighbour count with the smallest interval score on held-out
    training locations; ties go to the smaller D.

    Arguments are those of :func:`interval_scores_by_D`.

    Returns:
        Selected D
    """
    distinct = sorted({int(c) for c in candidates})
    if len(distinct) == 1:
        return distinct[0]
    scores = interval_scores_by_D(train, y, mean, sd, rho_s, rho_t, distinct, alpha, seed,
                                  n_holdout)
    best = int(scores.idxmin())
    logger.info("selected D=%d (interval score %.6g)", best, scores[best])
    return best
