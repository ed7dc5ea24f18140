"""
Log densities used by the hierarchical prior, each with its score.
"""

from typing import Tuple

import numpy as np
from scipy import special, stats


def invgamma_logpdf(x: float, shape: float, scale: float) -> float:
    """Inverse-gamma log density on the natural scale."""
    return float(stats.invgamma.logpdf(x, shape, scale=scale))


def log_invgamma(u: float, shape: float, scale: float) -> Tuple[float, float]:
    """
    Inverse-gamma prior expressed on u = log x, Jacobian included.

    Returns:
        (log density of u, derivative with respect to u)
    """
    value = invgamma_logpdf(np.exp(u), shape, scale) + u
    return value, -shape + scale * np.exp(-u)


def log_normal_on_log(u: float, mean: float, var: float) -> Tuple[float, float]:
    """
    Normal prior placed directly on u = log x.

    Returns:
        (log density of u, derivative with respect to u)
    """
    value = float(stats.norm.logpdf(u, loc=mean, scale=np.sqrt(var)))
    return value, -(u - mean) / var


def gaussian_iid(w: np.ndarray, log_var: float) -> Tuple[float, np.ndarray, float]:
    """
    Sum of N(0, exp(log_var)) log densities over the entries of w.

    Returns:
        (value, gradient w.r.t. w, derivative w.r.t. log_var)
    """
    var = np.exp(log_var)
    n = w.size
    ss = float(np.dot(w.ravel(), w.ravel()))
    value = -0.5 * n * (np.log(2.0 * np.pi) + log_var) - ss / (2.0 * var)
    return value, -w / var, -0.5 * n + ss / (2.0 * var)


def mvt_frequency_prior(omega: np.ndarray, log_nu: float, log_rho_s: float, log_rho_t: float,
                        log_rho_l: float, df_multiplier: float):
    """
    Multivariate t log density of frequency rows.

    Each row follows a t with k = df_multiplier * nu degrees of freedom,
    location 0 and diagonal scale (1/rho_s, 1/rho_s, 1/rho_t, 1/rho_l, ...).

    Args:
        omega: (J, 3 + p) frequencies
        log_nu, log_rho_s, log_rho_t, log_rho_l: Log hyperparameters
        df_multiplier: Degrees of freedom per unit of smoothness

    Returns:
        (value, gradient w.r.t. omega, derivatives w.r.t. (log_nu, log_rho_s,
        log_rho_t, log_rho_l))
    """
    J, q = omega.shape
    p = q - 3
    k = df_multiplier * np.exp(log_nu)
    rho = np.exp(np.concatenate([[log_rho_s, log_rho_s, log_rho_t], np.full(p, log_rho_l)]))
    scaled = (omega * rho) ** 2
    Q = scaled.sum(axis=1)
    log1p = np.log1p(Q / k)

    log_det_term = 2.0 * log_rho_s + log_rho_t + p * log_rho_l
    const = (special.gammaln(0.5 * (k + q)) - special.gammaln(0.5 * k)
             - 0.5 * q * np.log(k * np.pi) + log_det_term)
    value = J * const - 0.5 * (k + q) * log1p.sum()

    weight = (k + q) / (k + Q)
    grad_omega = -weight[:, None] * (rho ** 2) * omega

    d_rho_s = J * 2.0 - np.sum(weight * (scaled[:, 0] + scaled[:, 1]))
    d_rho_t = J * 1.0 - np.sum(weight * scaled[:, 2])
    d_rho_l = J * p - np.sum(weight * scaled[:, 3:].sum(axis=1)) if p else 0.0
    dk = (0.5 * special.digamma(0.5 * (k + q)) - 0.5 * special.digamma(0.5 * k)
          - q / (2.0 * k) - 0.5 * log1p + (k + q) * Q / (2.0 * k * (k + Q)))
    d_nu = k * dk.sum()
    return float(value), grad_omega, np.array([d_nu, d_rho_s, d_rho_t, d_rho_l])
