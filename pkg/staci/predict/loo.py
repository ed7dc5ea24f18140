"""
Leave-one-out field values at the training points.

Given a particle's frequencies, latent network and hyperparameters, the
amplitudes enter linearly with prior N(0, sigma2 / J) under Gaussian noise
tau2. The diagonal h of the resulting ridge hat matrix turns each fitted
residual into its leave-one-out residual,

    y_i - f_{-i}(x_i) = (y_i - f(x_i)) / (1 - h_ii),

so conformity scores at training points can be computed without refitting.
The identity is exact when the amplitudes sit at their conditional posterior
mean.
"""

import logging
from typing import Sequence, Tuple

import numpy as np
from scipy import linalg

from ..kernels.matern import as_coords
from ..model.network import StaciModel
from ..model.particle import Particle
from ..utils.errors import NumericalError, ShapeError

logger = logging.getLogger(__name__)

CHUNK = 4096
MAX_LEVERAGE = 1.0 - 1e-9


def _features(model: StaciModel, particle: Particle, X: np.ndarray):
    Z, cache = model.forward(particle, X, return_cache=True)
    return Z, np.hstack([cache["C"], cache["S"]])


def particle_leverage(model: StaciModel, particle: Particle, points,
                      chunk: int = CHUNK) -> Tuple[np.ndarray, np.ndarray]:
    """
    Field values and amplitude-block leverages of one particle.

    Args:
        model: Network the particle belongs to
        particle: Particle
        points: Training coordinates or STPoints
        chunk: Rows per feature block

    Returns:
        (f, h): fitted field values and hat-matrix diagonal, each (n,)
    """
    X = as_coords(points)
    J = model.config.J
    hyper = particle.hyper
    tau2, sigma2 = hyper["tau2"], hyper["sigma2"]

    A = np.eye(2 * J) * (J / sigma2)
    f = np.empty(X.shape[0])
    for start in range(0, X.shape[0], chunk):
        Z, Phi = _features(model, particle, X[start:start + chunk])
        A += Phi.T @ Phi / tau2
        f[start:start + chunk] = Z
    try:
        factor = linalg.cho_factor(A, lower=True)
    except linalg.LinAlgError as exc:
        raise NumericalError("amplitude precision is not positive definite",
                             where="leave-one-out") from exc

    h = np.empty(X.shape[0])
    for start in range(0, X.shape[0], chunk):
        _, Phi = _features(model, particle, X[start:start + chunk])
        h[start:start + chunk] = np.sum(Phi * linalg.cho_solve(factor, Phi.T).T, axis=1) / tau2
    return f, np.clip(h, 0.0, MAX_LEVERAGE)


def loo_draws(model: StaciModel, particles: Sequence[Particle], points, y) -> np.ndarray:
    """
    Leave-one-out field values at the training points, one row per particle.

    Args:
        model: Network the particles belong to
        particles: Trained particles
        points: Training coordinates or STPoints
        y: Training responses

    Returns:
        (M, n) array
    """
    y = np.asarray(y, dtype=float).ravel()
    if y.size != as_coords(points).shape[0]:
        raise ShapeError("y must have one value per training point")
    out = np.empty((len(particles), y.size))
    for i, particle in enumerate(particles):
        f, h = particle_leverage(model, particle, points)
        out[i] = y - (y - f) / (1.0 - h)
        logger.debug("particle %d: mean leverage %.4g", i, float(h.mean()))
    return out
