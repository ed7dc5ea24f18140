"""
Random Fourier Features

Frequency sampling from the Matern spectral density (a multivariate t) and
the cosine/sine feature map over the expanded coordinates [s, t, L].
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..kernels.matern import CovarianceParams, as_coords
from ..utils.errors import ParameterError, ShapeError

# Matern smoothness nu corresponds to 2 * nu degrees of freedom.
DEFAULT_DF_MULTIPLIER = 2.0


@dataclass
class FrequencySet:
    """
    J frequency rows over the expanded coordinates.

    Attributes:
        omega: (J, 3 + p) matrix with rows (omega_s, omega_t, omega_L)
    """

    omega: np.ndarray

    def __post_init__(self):
        self.omega = np.atleast_2d(np.asarray(self.omega, dtype=float))
        if self.omega.shape[1] < 3:
            raise ShapeError(f"frequency rows need at least 3 columns, got {self.omega.shape[1]}")
        if not np.all(np.isfinite(self.omega)):
            raise ParameterError("frequencies must be finite")

    @property
    def J(self) -> int:
        """Number of basis functions."""
        return self.omega.shape[0]

    @property
    def p(self) -> int:
        """Latent dimension."""
        return self.omega.shape[1] - 3


@dataclass
class AmplitudeSet:
    """
    Cosine and sine amplitudes of the J basis functions.

    Attributes:
        a: Cosine amplitudes
        b: Sine amplitudes
    """

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float).ravel()
        self.b = np.asarray(self.b, dtype=float).ravel()
        if self.a.shape != self.b.shape:
            raise ShapeError(f"a and b differ in length: {self.a.size} vs {self.b.size}")

    @property
    def J(self) -> int:
        return self.a.size

    @property
    def vector(self) -> np.ndarray:
        """Concatenated (a, b), aligned with the feature layout."""
        return np.concatenate([self.a, self.b])

    @classmethod
    def sample(cls, J: int, sigma2: float, seed: int) -> 'AmplitudeSet':
        """Draw a_j, b_j ~ N(0, sigma2 / J)."""
        rng = np.random.default_rng(seed)
        sd = np.sqrt(sigma2 / J)
        return cls(rng.normal(0.0, sd, J), rng.normal(0.0, sd, J))


def frequency_scale(params: CovarianceParams, p: int) -> np.ndarray:
    """
    Diagonal scale of the frequency distribution.

    Args:
        params: Covariance parameters
        p: Latent dimension

    Returns:
        Vector (1/rho_s, 1/rho_s, 1/rho_t, 1/rho_l, ..., 1/rho_l) of length 3 + p
    """
    return np.concatenate([
        [1.0 / params.rho_s, 1.0 / params.rho_s, 1.0 / params.rho_t],
        np.full(p, 1.0 / params.rho_l),
    ])


def sample_frequencies(J: int,
                       params: CovarianceParams,
                       p: int = 0,
                       seed: int = 0,
                       df_multiplier: float = DEFAULT_DF_MULTIPLIER) -> FrequencySet:
    """
    Draw J frequency rows from a multivariate t with df_multiplier * nu degrees of freedom.

    Rows are generated as Gaussian(0, diag(scale^2)) / sqrt(chi2_df / df).

    Args:
        J: Number of basis functions
        params: Covariance parameters
        p: Latent dimension
        seed: Random seed
        df_multiplier: Degrees of freedom per unit of smoothness

    Returns:
        FrequencySet of shape (J, 3 + p)
    """
    if J < 1:
        raise ParameterError(f"J must be at least 1, got {J}")
    if p < 0:
        raise ParameterError(f"p must be non-negative, got {p}")
    df = df_multiplier * params.nu
    if not np.isfinite(df) or df <= 0:
        raise ParameterError(f"degrees of freedom must be positive, got {df}")

    rng = np.random.default_rng(seed)
    z = rng.standard_normal((J, 3 + p)) * frequency_scale(params, p)
    w = rng.chisquare(df, size=J) / df
    return FrequencySet(z / np.sqrt(w)[:, None])


def expanded_inputs(points, latent: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Stack coordinates and latent values into (n, 3 + p) inputs.

    Args:
        points: Coordinates or STPoints
        latent: Optional (n, p) latent values

    Returns:
        (n, 3 + p) array
    """
    X = as_coords(points)
    if latent is None:
        return X
    L = np.asarray(latent, dtype=float)
    if L.ndim == 1:
        L = L[None, :] if X.shape[0] == 1 else L[:, None]
    if L.shape[0] != X.shape[0]:
        raise ShapeError("latent rows must match coordinate rows")
    return np.hstack([X, L])


def rff_features(points, latent: Optional[np.ndarray], freqs: FrequencySet) -> np.ndarray:
    """
    Cosine/sine features [cos(theta_1..J), sin(theta_1..J)] with theta = omega^T [s, t, L].

    Args:
        points: One STPoint, STPoints or (n, 3) coordinates
        latent: Latent values (p-vector for one point, (n, p) for many), or None if p = 0
        freqs: Frequency set

    Returns:
        2J vector for a single point, (n, 2J) matrix otherwise
    """
    single = np.asarray(as_coords(points)).shape[0] == 1 and (
        latent is None or np.asarray(latent).ndim <= 1)
    X = expanded_inputs(points, latent)
    if X.shape[1] != freqs.omega.shape[1]:
        raise ShapeError(f"inputs have {X.shape[1] - 3} latent dims, frequencies expect {freqs.p}")
    theta = X @ freqs.omega.T
    features = np.hstack([np.cos(theta), np.sin(theta)])
    return features[0] if single else features


def rff_evaluate(features: np.ndarray, amps: AmplitudeSet) -> np.ndarray:
    """
    Z = sum_j cos_j a_j + sin_j b_j.

    Args:
        features: 2J vector or (n, 2J) matrix
        amps: Amplitudes

    Returns:
        Scalar for a single feature vector, (n,) vector otherwise
    """
    features = np.asarray(features, dtype=float)
    if features.shape[-1] != 2 * amps.J:
        raise ShapeError(f"features have {features.shape[-1]} columns, expected {2 * amps.J}")
    out = features @ amps.vector
    return float(out) if np.ndim(out) == 0 else out


def marginalized_covariance(a, b, La: Optional[np.ndarray], Lb: Optional[np.ndarray],
                            freqs: FrequencySet, sigma2: float) -> float:
    """
    Covariance of the feature expansion after averaging over the amplitudes.

    Returns (sigma2 / J) * sum_j cos(omega_j^T h) with h = x_a - x_b.

    Args:
        a: First point
        b: Second point
        La: Latent vector at a (None when p = 0)
        Lb: Latent vector at b
        freqs: Frequency set
        sigma2: Process variance

    Returns:
        Covariance in [-sigma2, sigma2]
    """
    xa = expanded_inputs(a, None if La is None else np.atleast_2d(La))
    xb = expanded_inputs(b, None if Lb is None else np.atleast_2d(Lb))
    if xa.shape != xb.shape:
        raise ShapeError("latent vectors differ in length")
    return float(lag_covariance(xa[0] - xb[0], freqs, sigma2))


def lag_covariance(h: np.ndarray, freqs: FrequencySet, sigma2: float) -> np.ndarray:
    """
    Marginalized covariance for one lag vector or a (k, 3 + p) grid of lags.

    Args:
        h: Lag vector(s)
        freqs: Frequency set
        sigma2: Process variance

    Returns:
        Scalar or (k,) covariances
    """
    H = np.atleast_2d(np.asarray(h, dtype=float))
    if H.shape[1] != freqs.omega.shape[1]:
        raise ShapeError(f"lags have {H.shape[1]} columns, expected {freqs.omega.shape[1]}")
    values = sigma2 * np.mean(np.cos(freqs.omega @ H.T), axis=0)
    return values[0] if np.ndim(h) == 1 else values
