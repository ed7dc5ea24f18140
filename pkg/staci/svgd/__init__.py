"""
SVGD Module

This module provides tools for:
- The RBF kernel with median-heuristic bandwidth
- Stein perturbations and optimizer steps over particle ensembles
- The minibatch training loop and its trace
- Ensemble files
"""

from .config import OPTIMIZERS, SVGDConfig
from .ensemble import ENSEMBLE_MAGIC, Ensemble, init_ensemble, load_ensemble, save_ensemble
from .kernel import BANDWIDTH_FLOOR, KernelTerms, median_bandwidth, rbf_kernel
from .targets import GaussianTarget, ModelTarget
from .trainer import (
    TrainResult,
    Trainer,
    apply_update,
    stein_direction,
    svgd_direction,
    svgd_step,
    train,
)

__all__ = [
    'OPTIMIZERS',
    'SVGDConfig',
    'ENSEMBLE_MAGIC',
    'Ensemble',
    'init_ensemble',
    'load_ensemble',
    'save_ensemble',
    'BANDWIDTH_FLOOR',
    'KernelTerms',
    'median_bandwidth',
    'rbf_kernel',
    'GaussianTarget',
    'ModelTarget',
    'TrainResult',
    'Trainer',
    'apply_update',
    'stein_direction',
    'svgd_direction',
    'svgd_step',
    'train',
]
