"""
Exact Gaussian Process Oracle

Small-n simulation and kriging under the Matern model with nugget. Used as the
ground truth for simulated data and as a baseline in acceptance runs.
"""

import logging
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import linalg

from ..utils.errors import NumericalError, ParameterError, SizeError
from .matern import CovarianceParams, as_coords, matern_covariance, responses

logger = logging.getLogger(__name__)

LatentFn = Callable[[np.ndarray], np.ndarray]

DEFAULT_MAX_POINTS = 5000
JITTER_START = 1e-10
JITTER_STOP = 1e-4


def _latent(latent_fn: Optional[LatentFn], coords: np.ndarray) -> Optional[np.ndarray]:
    if latent_fn is None:
        return None
    values = np.asarray(latent_fn(coords), dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if values.shape[0] != coords.shape[0]:
        raise ParameterError("latent_fn must return one row per coordinate")
    return values


class ExactGP:
    """
    Exact GP with covariance sigma2 * M(d) + tau2 * I.

    Attributes:
        params: Covariance parameters
        latent_fn: Optional vectorized map from (n, 3) coordinates to (n, p)
            latent values; when given, distances are dimension-expanded
        max_points: Largest problem the oracle accepts
    """

    def __init__(self,
                 params: CovarianceParams,
                 latent_fn: Optional[LatentFn] = None,
                 max_points: int = DEFAULT_MAX_POINTS):
        """
        Initialize the oracle.

        Args:
            params: Covariance parameters
            latent_fn: Optional latent field for dimension expansion
            max_points: Cap on the number of points in one factorization
        """
        if max_points < 1:
            raise ParameterError("max_points must be positive")
        self.params = params
        self.latent_fn = latent_fn
        self.max_points = int(max_points)

    def _check_size(self, n: int):
        if n > self.max_points:
            raise SizeError(f"{n} points exceed the exact-GP cap of {self.max_points}")

    def covariance(self, A, B=None) -> np.ndarray:
        """
        Covariance sigma2 * M between coordinate sets (nugget excluded).

        Args:
            A: (n, 3) coordinates
            B: (m, 3) coordinates, defaults to A

        Returns:
            (n, m) matrix
        """
        A = as_coords(A)
        B = A if B is None else as_coords(B)
        LA = _latent(self.latent_fn, A)
        LB = LA if B is A else _latent(self.latent_fn, B)
        return matern_covariance(A, B, self.params, LA, LB)

    def cholesky(self, K: np.ndarray) -> np.ndarray:
        """
        Lower Cholesky factor with jitter escalation.

        Jitter starts at 1e-10 * sigma2 and grows tenfold up to 1e-4 * sigma2.

        Args:
            K: Symmetric positive (semi)definite matrix

        Returns:
            Lower-triangular factor of K + jitter * I
        """
        scale = self.params.sigma2 if self.params.sigma2 > 0 else max(self.params.tau2, 1.0)
        try:
            return linalg.cholesky(K, lower=True)
        except linalg.LinAlgError:
            pass
        jitter = JITTER_START * scale
        eye = np.eye(K.shape[0])
        while jitter <= JITTER_STOP * scale * (1 + 1e-9):
            try:
                factor = linalg.cholesky(K + jitter * eye, lower=True)
                logger.debug("Cholesky succeeded with jitter %.3g", jitter)
                return factor
            except linalg.LinAlgError:
                jitter *= 10.0
        raise NumericalError("covariance matrix is not positive definite after jitter",
                             where=f"jitter={JITTER_STOP * scale:.3g}")

    def simulate(self, points, seed: int) -> np.ndarray:
        """
        Draw one realization from N(0, sigma2 * M + tau2 * I).

        Uses a symmetric eigendecomposition so positive semidefinite matrices
        (coincident points, zero nugget) are handled exactly.

        Args:
            points: Coordinates or STPoints
            seed: Random seed

        Returns:
            Response vector of length n
        """
        coords = as_coords(points)
        n = coords.shape[0]
        self._check_size(n)
        rng = np.random.default_rng(seed)
        z = rng.standard_normal(n)
        if self.params.sigma2 == 0 and self.params.tau2 == 0:
            return np.zeros(n)

        K = self.covariance(coords)
        K[np.diag_indices_from(K)] += self.params.tau2
        eigvals, eigvecs = linalg.eigh(K)
        floor = -1e-8 * max(self.params.total_variance, 1e-300) * n
        if eigvals.min() < floor:
            raise NumericalError("covariance matrix has negative eigenvalues",
                                 where=f"min eigenvalue={eigvals.min():.3g}")
        factor = eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))
        return factor @ z

    def predict(self, train, test, y=None) -> Tuple[np.ndarray, np.ndarray]:
        """
        Kriging mean and predictive variance (nugget included).

        Args:
            train: Training coordinates, or STPoints carrying responses
            test: Test coordinates or STPoints
            y: Training responses; read from the STPoints when omitted

        Returns:
            (mean, variance) vectors over the test points
        """
        if y is None:
            y = responses(train)
        X = as_coords(train)
        Xs = as_coords(test)
        y = np.asarray(y, dtype=float).ravel()
        if y.size != X.shape[0]:
            raise ParameterError("y must have one value per training point")
        self._check_size(X.shape[0])

        K = self.covariance(X)
        K[np.diag_indices_from(K)] += self.params.tau2
        L = self.cholesky(K)
        k_star = self.covariance(Xs, X)

        alpha = linalg.cho_solve((L, True), y)
        mean = k_star @ alpha
        v = linalg.solve_triangular(L, k_star.T, lower=True)
        var = self.params.total_variance - np.sum(v * v, axis=0)
        return mean, np.clip(var, 0.0, None)


def exact_gp_simulate(points, params: CovarianceParams, latent_fn: Optional[LatentFn] = None,
                      seed: int = 0, max_points: int = DEFAULT_MAX_POINTS) -> np.ndarray:
    """
    Draw responses from the exact GP at the given points.

    Args:
        points: Coordinates or STPoints
        params: Covariance parameters
        latent_fn: Optional latent field for dimension expansion
        seed: Random seed
        max_points: Oracle cap

    Returns:
        Response vector
    """
    return ExactGP(params, latent_fn, max_points).simulate(points, seed)


def exact_gp_predict(train, test, params: CovarianceParams,
                     latent_fn: Optional[LatentFn] = None,
                     y=None,
                     max_points: int = DEFAULT_MAX_POINTS) -> Tuple[np.ndarray, np.ndarray]:
    """
    Kriging predictions from the exact GP.

    Args:
        train: Training STPoints with responses, or coordinates together with y
        test: Test coordinates or STPoints
        params: Covariance parameters
        latent_fn: Optional latent field
        y: Training responses when train is a coordinate array
        max_points: Oracle cap

    Returns:
        (mean, variance) over the test points
    """
    return ExactGP(params, latent_fn, max_points).predict(train, test, y)
