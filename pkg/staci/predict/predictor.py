"""
Ensemble predictor combining Bayesian summaries with conformal bands.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..kernels.matern import as_coords, responses
from ..model.network import StaciModel
from ..svgd.ensemble import Ensemble
from ..utils.config import resolve_workers
from ..utils.errors import ParameterError, ShapeError
from .calibration import DEFAULT_CANDIDATES, choose_D
from .conformal import conformal_bands
from .loo import loo_draws
from .neighbors import NeighborIndex
from .summary import PosteriorSummary, _check_alpha, summarize_draws

logger = logging.getLogger(__name__)

PREDICTION_COLUMNS = ("s1", "s2", "t", "y_true", "mean", "sd", "bayes_lo", "bayes_hi",
                      "conf_lo", "conf_hi")
CHUNK = 4096
CALIBRATIONS = ("fitted", "loo")


class StaciPredictor:
    """
    Read-only predictor over a trained ensemble.

    Range and nugget estimates are posterior means over the particles on the
    natural scale. Conformity scores at the training points use either the
    fitted values (``fitted``) or leave-one-out values of the amplitude block
    (``loo``).

    Attributes:
        model: Network the ensemble belongs to
        ensemble: Trained particles
        train: (n, 3) training coordinates
        y: Training responses
        alpha: Default miscoverage level
        D: Default neighbour count
        calibration: How training-point summaries for the scores are formed
    """

    def __init__(self, model: StaciModel, ensemble: Ensemble, train, y=None,
                 alpha: float = 0.05, D: int = 50, workers: Optional[int] = None,
                 calibration: str = "fitted"):
        self.model = model
        self.ensemble = ensemble
        self.particles = ensemble.particles(model)
        self.train = as_coords(train)
        self.y = responses(train) if y is None else np.asarray(y, dtype=float).ravel()
        if self.y.size != self.train.shape[0]:
            raise ShapeError("y must have one value per training point")
        self.alpha = _check_alpha(alpha)
        self.D = int(D)
        if calibration not in CALIBRATIONS:
            raise ParameterError(f"calibration must be one of {CALIBRATIONS}, got {calibration!r}")
        self.calibration = calibration
        self.workers = resolve_workers() if workers is None else workers
        hyper = np.exp(ensemble.theta[:, model.layout.hyper])
        self._hyper_mean = hyper.mean(axis=0)
        self._train_summary: Optional[PosteriorSummary] = None
        self._index: Optional[NeighborIndex] = None

    @property
    def tau2_hat(self) -> float:
        return float(self._hyper_mean[6])

    @property
    def rho_hat(self) -> Tuple[float, float]:
        """Posterior-mean (rho_s, rho_t)."""
        return float(self._hyper_mean[2]), float(self._hyper_mean[3])

    def draws(self, points) -> np.ndarray:
        """(M, n) field values, one row per particle."""
        X = as_coords(points)
        out = np.empty((len(self.particles), X.shape[0]))

        def fill(i):
            for start in range(0, X.shape[0], CHUNK):
                out[i, start:start + CHUNK] = self.model.forward(self.particles[i],
                                                                 X[start:start + CHUNK])

        if self.workers > 1 and len(self.particles) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                list(pool.map(fill, range(len(self.particles))))
        else:
            for i in range(len(self.particles)):
                fill(i)
        return out

    def summary(self, points, alpha: Optional[float] = None) -> PosteriorSummary:
        """Predictive mean, sd and credible bounds."""
        return summarize_draws(self.draws(points), self.tau2_hat,
                               self.alpha if alpha is None else alpha)

    @property
    def train_summary(self) -> PosteriorSummary:
        """Summaries at the training points that the conformity scores are built from."""
        if self._train_summary is None:
            if self.calibration == "loo":
                draws = loo_draws(self.model, self.particles, self.train, self.y)
                self._train_summary = summarize_draws(draws, self.tau2_hat, self.alpha)
            else:
                self._train_summary = self.summary(self.train)
        return self._train_summary

    @property
    def index(self) -> NeighborIndex:
        rho_s, rho_t = self.rho_hat
        if self._index is None:
            self._index = NeighborIndex(self.train, rho_s, rho_t)
        else:
            self._index.update(rho_s, rho_t)
        return self._index

    def conformal(self, points, D: Optional[int] = None, alpha: Optional[float] = None,
                  summary: Optional[PosteriorSummary] = None):
        """
        Closed-form conformal bands at the query points.

        Args:
            points: Query coordinates or STPoints
            D: Neighbour count; defaults to ``self.D``
            alpha: Miscoverage level; defaults to ``self.alpha``
            summary: Precomputed summary at the queries

        Returns:
            (lower, upper, q, fallback) arrays
        """
        D = self.D if D is None else D
        alpha = self.alpha if alpha is None else alpha
        summary = self.summary(points, alpha) if summary is None else summary
        neighbors = self.index.query(points, D)
        train = self.train_summary
        return conformal_bands(summary.mean, summary.sd, neighbors, self.y, train.mean,
                               train.sd, alpha)

    def choose_D(self, candidates: Sequence[int] = DEFAULT_CANDIDATES,
                 alpha: Optional[float] = None, seed: int = 0) -> int:
        """Cross-validate the neighbour count and adopt it."""
        rho_s, rho_t = self.rho_hat
        train = self.train_summary
        self.D = choose_D(self.train, self.y, train.mean, train.sd, rho_s, rho_t, candidates,
                          self.alpha if alpha is None else alpha, seed)
        return self.D

    def predict(self, points, y_true=None) -> pd.DataFrame:
        """
        Prediction table with Bayesian and conformal intervals.

        Args:
            points: Query coordinates or STPoints
            y_true: Observed responses, if known

        Returns:
            DataFrame with PREDICTION_COLUMNS (y_true NaN when unknown)
        """
        X = as_coords(points)
        summary = self.summary(X)
        lower, upper, _, fallback = self.conformal(X, summary=summary)
        if fallback.any():
            logger.warning("%d queries used the fallback band", int(fallback.sum()))
        y_col = np.full(X.shape[0], np.nan) if y_true is None else np.asarray(y_true, float)
        return pd.DataFrame({
            "s1": X[:, 0], "s2": X[:, 1], "t": X[:, 2], "y_true": y_col,
            "mean": summary.mean, "sd": summary.sd,
            "bayes_lo": summary.lower, "bayes_hi": summary.upper,
            "conf_lo": lower, "conf_hi": upper,
        }, columns=list(PREDICTION_COLUMNS))
