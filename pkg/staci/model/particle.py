"""
Particles and their flat-vector layout.

A particle bundles the latent network weights, the frequencies, the amplitudes
and the seven log-hyperparameters. SVGD works on flat vectors laid out as

    [network weights | frequencies (row-major) | a | b | log-hyperparameters]

with the log-hyperparameters ordered as ``HYPER_NAMES``.
"""

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from ..latent.inr import INRWeights
from ..spectral.features import AmplitudeSet, FrequencySet
from ..utils.errors import ShapeError
from .config import HYPER_NAMES, ModelConfig


@dataclass
class Particle:
    """
    One posterior sample.

    Attributes:
        inr: Latent network weights, None when p = 0
        freqs: (J, 3 + p) frequencies
        amps: Amplitudes a, b
        log_hyper: Log of (alpha, nu, rho_s, rho_t, rho_l, sigma2, tau2)
    """

    inr: Optional[INRWeights]
    freqs: FrequencySet
    amps: AmplitudeSet
    log_hyper: np.ndarray

    def __post_init__(self):
        self.log_hyper = np.asarray(self.log_hyper, dtype=float)
        if self.log_hyper.shape != (len(HYPER_NAMES),):
            raise ShapeError(f"log_hyper must have {len(HYPER_NAMES)} entries")
        if self.freqs.J != self.amps.J:
            raise ShapeError("frequency and amplitude counts differ")

    def log(self, name: str) -> float:
        return float(self.log_hyper[HYPER_NAMES.index(name)])

    @property
    def hyper(self) -> Dict[str, float]:
        """Hyperparameters on the natural scale."""
        return dict(zip(HYPER_NAMES, np.exp(self.log_hyper).tolist()))

    def copy(self) -> 'Particle':
        return Particle(None if self.inr is None else self.inr.copy(),
                        FrequencySet(self.freqs.omega.copy()),
                        AmplitudeSet(self.amps.a.copy(), self.amps.b.copy()),
                        self.log_hyper.copy())


class ParticleLayout:
    """Offsets of each block inside a flat particle vector."""

    def __init__(self, config: ModelConfig, n_inr: int):
        self.J = config.J
        self.q = 3 + config.latent_dim
        self.n_inr = n_inr
        starts = np.cumsum([0, n_inr, self.J * self.q, self.J, self.J, len(HYPER_NAMES)])
        self.inr = slice(starts[0], starts[1])
        self.freqs = slice(starts[1], starts[2])
        self.a = slice(starts[2], starts[3])
        self.b = slice(starts[3], starts[4])
        self.hyper = slice(starts[4], starts[5])
        self.size = int(starts[5])
        self._config = config

    def hyper_index(self, name: str) -> int:
        return self.hyper.start + HYPER_NAMES.index(name)

    def to_vector(self, particle: Particle) -> np.ndarray:
        vec = np.empty(self.size)
        if self.n_inr:
            vec[self.inr] = particle.inr.flat
        vec[self.freqs] = particle.freqs.omega.ravel()
        vec[self.a] = particle.amps.a
        vec[self.b] = particle.amps.b
        vec[self.hyper] = particle.log_hyper
        return vec

    def from_vector(self, vec: np.ndarray, encoding: Optional[np.ndarray] = None) -> Particle:
        """
        Rebuild a particle from a flat vector.

        Args:
            vec: Flat vector of length ``size``
            encoding: Frozen Gaussian encoding of an ffng network (not part of the vector)
        """
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (self.size,):
            raise ShapeError(f"expected a vector of length {self.size}, got {vec.shape}")
        inr = INRWeights(vec[self.inr].copy(), encoding) if self.n_inr else None
        return Particle(inr,
                        FrequencySet(vec[self.freqs].reshape(self.J, self.q).copy()),
                        AmplitudeSet(vec[self.a].copy(), vec[self.b].copy()),
                        vec[self.hyper].copy())

    def trainable_mask(self) -> np.ndarray:
        """True where the optimizer may move the entry."""
        mask = np.ones(self.size, dtype=bool)
        if self._config.freeze_frequencies:
            mask[self.freqs] = False
        if self._config.freeze_hyper:
            mask[self.hyper] = False
        return mask

    def hyper_mask(self) -> np.ndarray:
        """True on the log-hyperparameter entries."""
        mask = np.zeros(self.size, dtype=bool)
        mask[self.hyper] = True
        return mask

    def decay_mask(self) -> np.ndarray:
        """Entries subject to weight decay: everything but the log-hyperparameters."""
        return ~self.hyper_mask()


@dataclass
class LogJoint:
    """Log joint split into its parts, with the gradient as a flat vector."""

    log_prior: float
    log_likelihood: float
    grad: np.ndarray

    @property
    def value(self) -> float:
        return self.log_prior + self.log_likelihood
