"""
Model Module

This module provides tools for:
- Model configuration, hyperpriors and initialization
- Particles and their flat-vector layout
- The STACI forward pass, log joint and gradients
- Particle serialization
"""

from .config import HYPER_NAMES, HyperInit, ModelConfig, PriorConfig
from .network import (
    PARTICLE_MAGIC,
    StaciModel,
    log_joint_grad,
    log_likelihood,
    log_prior,
    particle_to_vector,
    staci_forward,
    vector_to_particle,
)
from .particle import LogJoint, Particle, ParticleLayout
from .priors import (
    gaussian_iid,
    invgamma_logpdf,
    log_invgamma,
    log_normal_on_log,
    mvt_frequency_prior,
)

__all__ = [
    'HYPER_NAMES',
    'HyperInit',
    'ModelConfig',
    'PriorConfig',
    'PARTICLE_MAGIC',
    'StaciModel',
    'staci_forward',
    'log_prior',
    'log_likelihood',
    'log_joint_grad',
    'particle_to_vector',
    'vector_to_particle',
    'LogJoint',
    'Particle',
    'ParticleLayout',
    'gaussian_iid',
    'invgamma_logpdf',
    'log_invgamma',
    'log_normal_on_log',
    'mvt_frequency_prior',
]
