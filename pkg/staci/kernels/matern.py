"""
Matern Covariance

Closed-form Matern correlation, anisotropic space-time distances and the
dimension-expanded distance that appends a latent field to (s, t).
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import special

from ..utils.errors import ParameterError, ShapeError

ArrayLike = Union[Sequence[float], np.ndarray]

# Half-integer smoothness values with closed forms.
_HALF_INTEGER = (0.5, 1.5, 2.5)


@dataclass(frozen=True)
class CovarianceParams:
    """
    Parameters of the (possibly dimension-expanded) Matern covariance.

    Attributes:
        sigma2: Process variance
        tau2: Nugget (noise) variance
        nu: Smoothness
        rho_s: Spatial range, in scaled coordinate units
        rho_t: Temporal range
        rho_l: Latent range, shared by every latent dimension
    """

    sigma2: float = 1.0
    tau2: float = 0.1
    nu: float = 1.5
    rho_s: float = 0.1
    rho_t: float = 0.3
    rho_l: float = 0.1

    def __post_init__(self):
        for name in ("nu", "rho_s", "rho_t", "rho_l"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ParameterError(f"{name} must be finite and positive, got {value}")
        # Variances may be zero to express degenerate processes.
        for name in ("sigma2", "tau2"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ParameterError(f"{name} must be finite and non-negative, got {value}")

    @property
    def total_variance(self) -> float:
        """Marginal variance sigma2 + tau2 of an observation."""
        return self.sigma2 + self.tau2


@dataclass(frozen=True)
class STPoint:
    """
    A space-time coordinate with an optional response.

    Attributes:
        s: Spatial coordinate (s1, s2), scaled to [0, 1]^2 by the pipeline
        t: Time
        y: Response (normalized units) or None
    """

    s: Tuple[float, float]
    t: float
    y: Optional[float] = None

    def __post_init__(self):
        if len(self.s) != 2:
            raise ShapeError(f"s must have two components, got {len(self.s)}")
        object.__setattr__(self, "s", (float(self.s[0]), float(self.s[1])))
        object.__setattr__(self, "t", float(self.t))

    @property
    def coords(self) -> np.ndarray:
        """Coordinate vector (s1, s2, t)."""
        return np.array([self.s[0], self.s[1], self.t], dtype=float)


def as_coords(points) -> np.ndarray:
    """
    Convert points to an (n, 3) coordinate array.

    Args:
        points: A single STPoint, a sequence of STPoints, or an array with
            three columns (s1, s2, t)

    Returns:
        Float array of shape (n, 3)
    """
    if isinstance(points, STPoint):
        return points.coords[None, :]
    if isinstance(points, np.ndarray):
        arr = np.asarray(points, dtype=float)
    else:
        points = list(points)
        if points and isinstance(points[0], STPoint):
            arr = np.array([p.coords for p in points], dtype=float)
        else:
            arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ShapeError(f"coordinates must have shape (n, 3), got {arr.shape}")
    return arr


def responses(points) -> np.ndarray:
    """Response vector of a sequence of STPoints; missing responses raise."""
    values = [p.y for p in points]
    if any(v is None for v in values):
        raise ParameterError("every point needs a response")
    return np.asarray(values, dtype=float)


def _check_nu(nu: float) -> float:
    nu = float(nu)
    if not math.isfinite(nu) or nu <= 0:
        raise ParameterError(f"nu must be finite and positive, got {nu}")
    return nu


def matern_correlation(d: ArrayLike, nu: float) -> Union[float, np.ndarray]:
    """
    Matern correlation (2^(1-nu)/Gamma(nu)) (sqrt(2 nu) d)^nu K_nu(sqrt(2 nu) d).

    Args:
        d: Non-negative scaled distance(s)
        nu: Smoothness

    Returns:
        Correlation(s) in [0, 1], exactly 1 at d = 0
    """
    nu = _check_nu(nu)
    arr = np.asarray(d, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise ParameterError("distances must be finite and non-negative")

    x = math.sqrt(2.0 * nu) * arr
    if nu in _HALF_INTEGER:
        e = np.exp(-x)
        if nu == 0.5:
            out = e
        elif nu == 1.5:
            out = (1.0 + x) * e
        else:
            out = (1.0 + x + x * x / 3.0) * e
    else:
        out = np.ones_like(x)
        pos = x > 0
        xp = x[pos]
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            log_val = ((1.0 - nu) * math.log(2.0) - special.gammaln(nu)
                       + nu * np.log(xp) + np.log(special.kve(nu, xp)) - xp)
        out[pos] = np.where(np.isfinite(log_val), np.exp(log_val), 0.0)

    out = np.clip(out, 0.0, 1.0)
    # d = 0 is a removable singularity of the Bessel form.
    out = np.where(arr == 0, 1.0, out)
    if out.ndim == 0:
        return float(out)
    return out


def st_distance_matrix(A: np.ndarray, B: np.ndarray, params: CovarianceParams) -> np.ndarray:
    """
    Pairwise anisotropic space-time distances.

    Args:
        A: (n, 3) coordinates
        B: (m, 3) coordinates
        params: Covariance parameters (ranges)

    Returns:
        (n, m) distances
    """
    return np.sqrt(_st_sq(as_coords(A), as_coords(B), params))


def _st_sq(A: np.ndarray, B: np.ndarray, params: CovarianceParams) -> np.ndarray:
    ds = (A[:, None, :2] - B[None, :, :2]) / params.rho_s
    dt = (A[:, None, 2] - B[None, :, 2]) / params.rho_t
    return np.sum(ds * ds, axis=-1) + dt * dt


def _latent_sq(LA: np.ndarray, LB: np.ndarray, params: CovarianceParams) -> np.ndarray:
    if LA.shape[1] != LB.shape[1]:
        raise ShapeError(f"latent dimensions differ: {LA.shape[1]} vs {LB.shape[1]}")
    dl = (LA[:, None, :] - LB[None, :, :]) / params.rho_l
    return np.sum(dl * dl, axis=-1)


def expanded_distance_matrix(A, B, LA: np.ndarray, LB: np.ndarray,
                             params: CovarianceParams) -> np.ndarray:
    """
    Pairwise distances in the expanded space [s, t, L(s, t)].

    Args:
        A: (n, 3) coordinates
        B: (m, 3) coordinates
        LA: (n, p) latent values at A
        LB: (m, p) latent values at B
        params: Covariance parameters

    Returns:
        (n, m) distances
    """
    A = as_coords(A)
    B = as_coords(B)
    LA = np.atleast_2d(np.asarray(LA, dtype=float))
    LB = np.atleast_2d(np.asarray(LB, dtype=float))
    if LA.shape[0] != A.shape[0] or LB.shape[0] != B.shape[0]:
        raise ShapeError("latent rows must match coordinate rows")
    return np.sqrt(_st_sq(A, B, params) + _latent_sq(LA, LB, params))


def st_distance(a: STPoint, b: STPoint, params: CovarianceParams) -> float:
    """
    Anisotropic distance d^2 = |s_a - s_b|^2/rho_s^2 + (t_a - t_b)^2/rho_t^2.

    Args:
        a: First point
        b: Second point
        params: Covariance parameters

    Returns:
        Distance d >= 0
    """
    return float(st_distance_matrix(as_coords(a), as_coords(b), params)[0, 0])


def expanded_distance(a: STPoint, b: STPoint, La: ArrayLike, Lb: ArrayLike,
                      params: CovarianceParams) -> float:
    """
    Dimension-expanded distance: st_distance^2 + sum_j (La_j - Lb_j)^2 / rho_l^2.

    Args:
        a: First point
        b: Second point
        La: Latent vector at a
        Lb: Latent vector at b
        params: Covariance parameters

    Returns:
        Distance d >= st_distance(a, b)
    """
    La = np.atleast_1d(np.asarray(La, dtype=float))
    Lb = np.atleast_1d(np.asarray(Lb, dtype=float))
    if La.shape != Lb.shape:
        raise ShapeError(f"latent vectors differ in length: {La.size} vs {Lb.size}")
    return float(expanded_distance_matrix(as_coords(a), as_coords(b), La[None, :],
                                          Lb[None, :], params)[0, 0])


def matern_covariance(A, B, params: CovarianceParams,
                      LA: Optional[np.ndarray] = None,
                      LB: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Cross-covariance sigma2 * M(d) between two coordinate sets.

    The nugget is not included; add it on the diagonal of a training matrix.

    Args:
        A: (n, 3) coordinates
        B: (m, 3) coordinates
        params: Covariance parameters
        LA: Optional (n, p) latent values at A
        LB: Optional (m, p) latent values at B

    Returns:
        (n, m) covariance matrix
    """
    if (LA is None) != (LB is None):
        raise ParameterError("latent values must be given for both sets or neither")
    if LA is None:
        d = st_distance_matrix(A, B, params)
    else:
        d = expanded_distance_matrix(A, B, LA, LB, params)
    return params.sigma2 * matern_correlation(d, params.nu)
