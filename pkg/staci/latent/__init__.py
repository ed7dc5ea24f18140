"""
Latent Module

Implicit neural representations of the latent field L(s, t).
"""

from .activations import gelu, gelu_grad
from .inr import (
    BACKBONES,
    INRConfig,
    INRLayout,
    INRWeights,
    INR,
    init_inr,
    latent_forward,
    latent_backward,
)

__all__ = [
    'gelu',
    'gelu_grad',
    'BACKBONES',
    'INRConfig',
    'INRLayout',
    'INRWeights',
    'INR',
    'init_inr',
    'latent_forward',
    'latent_backward',
]
