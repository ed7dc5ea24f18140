"""
Nearest training points under the scaled space-time distance

    [||s_i - s_q|| / rho_s]^2 + [|t_i - t_q| / rho_t]^2

with ties broken by the lower training index.
"""

import logging
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from ..kernels.matern import as_coords
from ..utils.errors import ParameterError

logger = logging.getLogger(__name__)

BRUTE_FORCE_BELOW = 2000
REBUILD_TOLERANCE = 0.01


class NeighborIndex:
    """
    Neighbor search over training coordinates for fixed range estimates.

    Below ``brute_force_below`` points every query scans all points; above it a
    kd-tree over (s1/rho_s, s2/rho_s, t/rho_t) supplies candidates that are then
    re-ranked exactly.

    Attributes:
        coords: (n, 3) training coordinates
        rho_s: Spatial range the index was built for
        rho_t: Temporal range the index was built for
    """

    def __init__(self, train, rho_s: float, rho_t: float,
                 brute_force_below: int = BRUTE_FORCE_BELOW):
        self.coords = as_coords(train)
        if self.coords.shape[0] == 0:
            raise ParameterError("no training points to index")
        self.brute_force_below = brute_force_below
        self._tree: Optional[cKDTree] = None
        self._build(rho_s, rho_t)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def uses_tree(self) -> bool:
        return self._tree is not None

    def _build(self, rho_s: float, rho_t: float):
        if not (rho_s > 0 and rho_t > 0):
            raise ParameterError("ranges must be positive")
        self.rho_s = float(rho_s)
        self.rho_t = float(rho_t)
        self.scaled = self._scale(self.coords)
        self._tree = cKDTree(self.scaled) if self.n >= self.brute_force_below else None

    def _scale(self, X: np.ndarray) -> np.ndarray:
        return X / np.array([self.rho_s, self.rho_s, self.rho_t])

    def update(self, rho_s: float, rho_t: float) -> bool:
        """
        Adopt new ranges; rebuild only if either moved by more than 1%.

        Returns:
            True if the index was rebuilt
        """
        change = max(abs(rho_s / self.rho_s - 1.0), abs(rho_t / self.rho_t - 1.0))
        if change <= REBUILD_TOLERANCE:
            return False
        logger.debug("rebuilding neighbor index (range change %.3g)", change)
        self._build(rho_s, rho_t)
        return True

    def _rank(self, q: np.ndarray, candidates: np.ndarray, D: int) -> np.ndarray:
        d2 = np.sum((self.scaled[candidates] - q) ** 2, axis=1)
        order = np.lexsort((candidates, d2))
        return candidates[order[:D]]

    def query(self, queries, D: int) -> np.ndarray:
        """
        D nearest training indices for each query, nearest first.

        Args:
            queries: Query coordinates or STPoints
            D: Neighbor count

        Returns:
            (n_queries, D) integer array
        """
        if not 1 <= D <= self.n:
            raise ParameterError(f"D must lie in [1, {self.n}], got {D}")
        Q = self._scale(as_coords(queries))
        out = np.empty((Q.shape[0], D), dtype=int)
        if self._tree is None:
            everything = np.arange(self.n)
            for i, q in enumerate(Q):
                out[i] = self._rank(q, everything, D)
            return out

        k = min(D + 1, self.n)
        dist, idx = self._tree.query(Q, k=k)
        dist = dist.reshape(Q.shape[0], k)
        idx = idx.reshape(Q.shape[0], k)
        for i, q in enumerate(Q):
            radius = dist[i, D - 1]
            if k > D and np.isclose(dist[i, D], radius, rtol=1e-12, atol=0.0):
                # ties at the boundary: gather every point at that distance
                reach = radius * (1 + 1e-9) + 1e-300
                candidates = np.asarray(self._tree.query_ball_point(q, reach))
            else:
                candidates = idx[i, :D]
            out[i] = self._rank(q, np.asarray(candidates, dtype=int), D)
        return out


def neighbor_select(query, train, D: int, rho_s: float, rho_t: float) -> np.ndarray:
    """
    Indices of the D training points closest to one query.

    Args:
        query: One STPoint or coordinate triple
        train: Training coordinates or STPoints
        D: Neighbor count
        rho_s, rho_t: Range estimates

    Returns:
        Length-D index array, nearest first
    """
    return NeighborIndex(train, rho_s, rho_t).query(query, D)[0]
