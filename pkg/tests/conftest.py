"""
Pytest configuration and fixtures for STACI testing.
"""

import numpy as np
import pytest

from staci.kernels import CovarianceParams
from staci.latent import INRConfig
from staci.model import ModelConfig, StaciModel


@pytest.fixture
def params():
    """Covariance parameters with distinct ranges."""
    return CovarianceParams(sigma2=1.5, tau2=0.2, nu=1.5, rho_s=0.2, rho_t=0.5, rho_l=0.3)


@pytest.fixture
def rng():
    """Seeded generator for test inputs."""
    return np.random.default_rng(12345)


@pytest.fixture
def coords(rng):
    """Twenty random space-time coordinates in the unit cube."""
    return rng.uniform(0.0, 1.0, (20, 3))


@pytest.fixture
def toy_inr_config():
    """Tiny residual network: 2 layers, width 4, p = 2."""
    return INRConfig(backbone="resmlp", layers=2, width=4, latent_dim=2)


@pytest.fixture
def toy_model(toy_inr_config):
    """Model with fewer than 500 parameters."""
    return StaciModel(ModelConfig(J=5, inr=toy_inr_config))


@pytest.fixture
def stationary_model():
    """Model with the latent field disabled (p = 0)."""
    return StaciModel(ModelConfig(J=6, inr=None))


@pytest.fixture
def toy_data(rng):
    """Small regression set: coordinates and responses."""
    X = rng.uniform(0.0, 1.0, (12, 3))
    y = np.sin(2.0 * np.pi * X[:, 0]) + 0.1 * rng.standard_normal(12)
    return X, y


@pytest.fixture
def tolerance():
    """Default tolerance for floating point comparisons."""
    return 1e-10


@pytest.fixture
def gradient_tolerance():
    """Relative tolerance of finite-difference gradient checks."""
    return 1e-4
