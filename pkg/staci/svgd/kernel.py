"""
RBF kernel over flattened particles.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist, squareform

BANDWIDTH_FLOOR = 1e-12


@dataclass
class KernelTerms:
    """
    Kernel matrix and the summed kernel gradients of one particle cloud.

    Attributes:
        K: (M, M) kernel matrix
        h2: Squared bandwidth
        repulsion: (M, dim), row i = sum_j grad_{theta_j} k(theta_j, theta_i)
        theta: The particles the terms were built from
    """

    K: np.ndarray
    h2: float
    repulsion: np.ndarray
    theta: np.ndarray

    def grad(self, i: int, j: int) -> np.ndarray:
        """grad_{theta_j} k(theta_j, theta_i)."""
        return -self.K[i, j] * (self.theta[j] - self.theta[i]) / self.h2


def median_bandwidth(sq_dists: np.ndarray, M: int) -> float:
    """
    Median heuristic h^2 = median(pairwise squared distances) / (2 log(M + 1)).

    Args:
        sq_dists: Condensed squared distances over pairs i < j
        M: Number of particles
    """
    if M == 1 or sq_dists.size == 0:
        return 1.0
    return max(float(np.median(sq_dists)) / (2.0 * np.log(M + 1.0)), BANDWIDTH_FLOOR)


def rbf_kernel(theta: np.ndarray, bandwidth: Optional[float] = None) -> KernelTerms:
    """
    k(x, x') = exp(-||x - x'||^2 / (2 h^2)) over all particle pairs.

    Args:
        theta: (M, dim) particles
        bandwidth: Fixed squared bandwidth; None uses the median heuristic

    Returns:
        KernelTerms with the kernel matrix and the repulsion term
    """
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    M = theta.shape[0]
    sq = pdist(theta, "sqeuclidean")
    h2 = median_bandwidth(sq, M) if bandwidth is None else max(float(bandwidth), BANDWIDTH_FLOOR)
    K = squareform(np.exp(-sq / (2.0 * h2)))
    np.fill_diagonal(K, 1.0)
    repulsion = (K.sum(axis=1)[:, None] * theta - K @ theta) / h2
    return KernelTerms(K, h2, repulsion, theta)
