"""
STACI: Spatio-Temporal Conformal Inference

Nonstationary space-time Gaussian-process regression through random Fourier
features on dimension-expanded coordinates, fitted by Stein variational
gradient descent and calibrated with local space-time conformal intervals.

Modules:
- kernels: Matern covariance, space-time distances and the exact GP oracle
- spectral: Random Fourier features and the Monte Carlo covariance verifier
- latent: Implicit neural representations of the latent field
- model: Hierarchical prior, likelihood and gradients of one particle
- svgd: Stein variational gradient descent over particle ensembles
- predict: Posterior summaries, neighbour search and conformal bands
- metrics: RMSE, NLL, CRPS, interval score and coverage
- pipeline: Data handling, simulation and experiment orchestration
- utils: Errors, logging, configuration and serialization helpers

Version: 0.1.0
"""

__version__ = "0.1.0"
__description__ = "Nonstationary space-time GP regression with conformal intervals"

from . import kernels
from . import spectral
from . import latent
from . import model
from . import svgd
from . import predict
from . import metrics
from . import pipeline
from . import utils

__all__ = [
    'kernels',
    'spectral',
    'latent',
    'model',
    'svgd',
    'predict',
    'metrics',
    'pipeline',
    'utils',
]
