"""
Log-density targets the sampler can move particles toward.

A target exposes ``n`` (rows to shuffle into minibatches; 1 when there is no
data), ``score(theta, idx)`` returning per-particle log densities and their
gradients, ``summarize(theta)`` for the training trace, and optional
``trainable_mask`` / ``decay_mask`` / ``hyper_mask`` vectors.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import stats

from ..kernels.matern import as_coords, responses
from ..model.config import HYPER_NAMES
from ..model.network import StaciModel
from ..utils.errors import NumericalError, ShapeError
from ..utils.config import resolve_workers

logger = logging.getLogger(__name__)


class GaussianTarget:
    """
    Closed-form multivariate normal target.

    Attributes:
        mean: Target mean
        cov: Target covariance
    """

    n = 1
    trainable_mask = None
    decay_mask = None
    hyper_mask = None

    def __init__(self, mean, cov):
        self.mean = np.atleast_1d(np.asarray(mean, dtype=float))
        self.cov = np.atleast_2d(np.asarray(cov, dtype=float))
        if self.cov.shape != (self.mean.size, self.mean.size):
            raise ShapeError("cov must be square and match the mean")
        self.precision = np.linalg.inv(self.cov)
        self._dist = stats.multivariate_normal(self.mean, self.cov)

    @property
    def dim(self) -> int:
        return self.mean.size

    def log_density(self, theta: np.ndarray) -> np.ndarray:
        return np.atleast_1d(self._dist.logpdf(np.atleast_2d(theta)))

    def score(self, theta: np.ndarray, idx=None) -> Tuple[np.ndarray, np.ndarray]:
        theta = np.atleast_2d(theta)
        return self.log_density(theta), -(theta - self.mean) @ self.precision

    def summarize(self, theta: np.ndarray) -> Dict[str, float]:
        return {f"mean_{k}": float(v) for k, v in enumerate(theta.mean(axis=0))}


class ModelTarget:
    """
    Posterior of a STACI model given training data.

    Per-particle gradients run on a thread pool sized by ``workers``
    (``STACI_WORKERS`` when omitted); results do not depend on it.
    """

    def __init__(self, model: StaciModel, data, y=None, encodings: Optional[List] = None,
                 workers: Optional[int] = None):
        self.model = model
        self.coords = as_coords(data)
        self.y = responses(data) if y is None else np.asarray(y, dtype=float).ravel()
        if self.y.size != self.coords.shape[0]:
            raise ShapeError("y must have one value per training point")
        self.encodings = encodings
        self.workers = resolve_workers() if workers is None else workers
        self.trainable_mask = model.layout.trainable_mask()
        self.decay_mask = model.layout.decay_mask()
        self.hyper_mask = model.layout.hyper_mask()

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    def _one(self, i: int, vec: np.ndarray, idx: np.ndarray):
        encoding = self.encodings[i] if self.encodings else None
        particle = self.model.from_vector(vec, encoding)
        try:
            result = self.model.log_joint_grad(particle, self.coords[idx], self.n, self.y[idx])
        except NumericalError as exc:
            raise NumericalError(str(exc), where=f"particle {i}") from exc
        return result.value, result.grad

    def score(self, theta: np.ndarray, idx=None) -> Tuple[np.ndarray, np.ndarray]:
        if idx is None:
            idx = np.arange(self.n)
        M = theta.shape[0]
        if self.workers > 1 and M > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                results = list(pool.map(lambda i: self._one(i, theta[i], idx), range(M)))
        else:
            results = [self._one(i, theta[i], idx) for i in range(M)]
        values = np.array([r[0] for r in results])
        grads = np.vstack([r[1] for r in results])
        return values, grads

    def summarize(self, theta: np.ndarray) -> Dict[str, float]:
        """Posterior means of the hyperparameters on the natural scale."""
        hyper = np.exp(theta[:, self.model.layout.hyper])
        return {name: float(v) for name, v in zip(HYPER_NAMES, hyper.mean(axis=0))}
