"""
Synthetic data from the exact Matern oracle, stationary or dimension-expanded.
"""

import logging
from dataclasses import asdict
from typing import Callable, Dict, Optional

import numpy as np

from ..kernels.exact_gp import DEFAULT_MAX_POINTS, exact_gp_simulate
from ..kernels.matern import CovarianceParams
from ..utils.config import derive_seeds
from ..utils.errors import ParameterError, SizeError
from .dataset import Dataset

logger = logging.getLogger(__name__)

SIM_KINDS = ("stationary", "expanded")


def _sine(X: np.ndarray) -> np.ndarray:
    return np.sin(2.0 * np.pi * X[:, 0])


def _radial(X: np.ndarray) -> np.ndarray:
    r2 = (X[:, 0] - 0.5) ** 2 + (X[:, 1] - 0.5) ** 2
    return np.exp(-r2 / 0.05)


def _wave(X: np.ndarray) -> np.ndarray:
    return np.sin(2.0 * np.pi * (X[:, 0] + X[:, 2]))


LATENT_PRESETS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "sine": _sine,
    "radial": _radial,
    "wave": _wave,
}


def latent_preset(name: str, amplitude: float = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    """
    Analytic latent field scaled by amplitude, returning (n, 1) values.

    Args:
        name: One of LATENT_PRESETS
        amplitude: Multiplier of the field
    """
    if name not in LATENT_PRESETS:
        raise ParameterError(f"unknown latent preset '{name}'; "
                             f"choose from {sorted(LATENT_PRESETS)}")
    field = LATENT_PRESETS[name]
    return lambda X: amplitude * field(np.asarray(X, dtype=float))[:, None]


def simulation_coords(n: int, seed: int, n_times: Optional[int] = None) -> np.ndarray:
    """
    Uniform coordinates on [0, 1]^3, or n_times equally spaced time steps with
    n / n_times uniform locations each.
    """
    rng = np.random.default_rng(seed)
    if n_times is None:
        return rng.uniform(0.0, 1.0, (n, 3))
    if n_times < 1 or n % n_times:
        raise ParameterError(f"n={n} is not a multiple of n_times={n_times}")
    per = n // n_times
    times = np.repeat(np.linspace(0.0, 1.0, n_times) if n_times > 1 else [0.0], per)
    return np.column_stack([rng.uniform(0.0, 1.0, (n, 2)), times])


def simulate_dataset(kind: str = "stationary",
                     n: int = 2000,
                     params: Optional[CovarianceParams] = None,
                     latent: str = "sine",
                     amplitude: float = 1.0,
                     seed: int = 0,
                     coords: Optional[np.ndarray] = None,
                     n_times: Optional[int] = None,
                     max_points: int = DEFAULT_MAX_POINTS) -> Dataset:
    """
    Draw a dataset from the exact Matern model.

    Args:
        kind: 'stationary' or 'expanded' (latent field added to the distance)
        n: Number of rows (ignored when coords are given)
        params: True covariance parameters
        latent: Latent preset for the expanded kind
        amplitude: Latent amplitude; 0 reproduces the stationary draw
        seed: Master seed (coordinates and responses use split seeds)
        coords: Fixed coordinates, overriding the random design
        n_times: Number of time steps for a per-time design
        max_points: Oracle cap

    Returns:
        Unsplit Dataset with the true parameters in its metadata
    """
    if kind not in SIM_KINDS:
        raise ParameterError(f"kind must be one of {SIM_KINDS}, got {kind!r}")
    params = params if params is not None else CovarianceParams()
    coord_seed, response_seed = derive_seeds(seed, 2)
    X = simulation_coords(n, coord_seed, n_times) if coords is None else np.asarray(coords, float)
    if X.shape[0] > max_points:
        raise SizeError(f"{X.shape[0]} points exceed the exact-GP cap of {max_points}")
    latent_fn = latent_preset(latent, amplitude) if kind == "expanded" else None
    y = exact_gp_simulate(X, params, latent_fn, response_seed, max_points)
    metadata = {"kind": kind, "params": asdict(params), "seed": seed}
    if kind == "expanded":
        metadata.update(latent=latent, amplitude=amplitude)
    logger.info("simulated %d %s rows", X.shape[0], kind)
    return Dataset(X, y, name=f"simulated {kind}", metadata=metadata)
