"""
STACI Network

The latent network feeds dimension-expanded random Fourier features; the
hierarchical prior ties the frequencies to the Matern hyperparameters and a
Gaussian nugget links the field to the responses.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from ..kernels.matern import CovarianceParams, as_coords, responses
from ..latent.inr import INR
from ..spectral.features import AmplitudeSet, FrequencySet, sample_frequencies
from ..utils.config import config_hash, derive_seeds
from ..utils.errors import DataError, NumericalError, ParameterError, ShapeError
from ..utils.serialization import (pack_array, pack_bytes, pack_header, unpack_array,
                                   unpack_bytes, unpack_header)
from .config import HYPER_NAMES, ModelConfig
from .particle import LogJoint, Particle, ParticleLayout
from .priors import gaussian_iid, log_invgamma, log_normal_on_log, mvt_frequency_prior

logger = logging.getLogger(__name__)

PARTICLE_MAGIC = b"STACIPRT"


class StaciModel:
    """
    Forward pass, log joint and gradients for one configuration.

    Attributes:
        config: Model configuration
        inr: Latent network, None when p = 0
        layout: Flat-vector layout of a particle
    """

    def __init__(self, config: Optional[ModelConfig] = None):
        self.config = config if config is not None else ModelConfig()
        self.inr = INR(self.config.inr) if self.config.inr is not None else None
        self.layout = ParticleLayout(self.config, self.inr.n_params if self.inr else 0)

    @property
    def p(self) -> int:
        return self.config.latent_dim

    @property
    def dim(self) -> int:
        """Length of a flat particle vector."""
        return self.layout.size

    def init_particle(self, seed: int) -> Particle:
        """
        Draw an initial particle.

        Hyperparameters start at ``config.init`` with log-scale jitter; the
        network weights, frequencies and amplitudes are drawn from their priors
        given those hyperparameters.
        """
        init = self.config.init
        hyper_seed, inr_seed, freq_seed, amp_seed = derive_seeds(seed, 4)
        centre = np.log([self.config.initial_alpha(), init.nu, init.rho_s, init.rho_t,
                         init.rho_l, init.sigma2, init.tau2])
        jitter = np.random.default_rng(hyper_seed).normal(0.0, init.jitter, len(HYPER_NAMES))
        log_hyper = centre + jitter
        alpha, nu, rho_s, rho_t, rho_l, sigma2, tau2 = np.exp(log_hyper)

        params = CovarianceParams(sigma2=sigma2, tau2=tau2, nu=nu, rho_s=rho_s, rho_t=rho_t,
                                  rho_l=rho_l)
        weights = self.inr.init(alpha, inr_seed) if self.inr is not None else None
        freqs = sample_frequencies(self.config.J, params, self.p, freq_seed,
                                   self.config.df_multiplier)
        amps = AmplitudeSet.sample(self.config.J, sigma2, amp_seed)
        return Particle(weights, freqs, amps, log_hyper)

    # forward pass

    def latent(self, particle: Particle, batch) -> Optional[np.ndarray]:
        """Latent values L(s, t), or None when p = 0."""
        if self.inr is None:
            return None
        return self.inr.forward(particle.inr, batch)

    def forward(self, particle: Particle, batch, return_cache: bool = False):
        """
        Field values Z at the batch.

        Args:
            particle: Particle
            batch: Coordinates or STPoints
            return_cache: Also return intermediates for the gradient

        Returns:
            (n,) vector, or (Z, cache)
        """
        X = as_coords(batch)
        inr_cache = None
        if self.inr is not None:
            L, inr_cache = self.inr.forward(particle.inr, X, return_cache=True)
            Xe = np.hstack([X, L])
        else:
            Xe = X
        if Xe.shape[1] != particle.freqs.omega.shape[1]:
            raise ShapeError("particle frequencies do not match the latent dimension")
        theta = Xe @ particle.freqs.omega.T
        C, S = np.cos(theta), np.sin(theta)
        Z = C @ particle.amps.a + S @ particle.amps.b
        if return_cache:
            return Z, {"Xe": Xe, "C": C, "S": S, "inr": inr_cache}
        return Z

    # densities

    def log_prior(self, particle: Particle, with_grad: bool = False):
        """
        Log prior of the particle on the log-hyperparameter scale.

        Returns:
            Value, or (value, flat gradient) when with_grad is set
        """
        lay = self.layout
        pri = self.config.priors
        lh = particle.log_hyper
        l_alpha, l_nu, l_rs, l_rt, l_rl, l_s2, l_t2 = lh
        grad = np.zeros(lay.size)
        g_h = np.zeros(len(HYPER_NAMES))
        total = 0.0

        if self.inr is not None:
            value, g_w, g_alpha = gaussian_iid(particle.inr.flat, l_alpha)
            total += value
            grad[lay.inr] = g_w
            g_h[0] += g_alpha

        value, g_omega, g_freq_h = mvt_frequency_prior(particle.freqs.omega, l_nu, l_rs, l_rt,
                                                      l_rl, self.config.df_multiplier)
        total += value
        grad[lay.freqs] = g_omega.ravel()
        g_h[1:5] += g_freq_h

        l_amp_var = l_s2 - np.log(self.config.J)
        value, g_amp, g_var = gaussian_iid(particle.amps.vector, l_amp_var)
        total += value
        grad[lay.a] = g_amp[:self.config.J]
        grad[lay.b] = g_amp[self.config.J:]
        g_h[5] += g_var

        hyperpriors = (
            log_invgamma(l_alpha, pri.alpha_shape, pri.alpha_scale),
            log_normal_on_log(l_nu, pri.log_nu_mean, pri.log_nu_var),
            log_normal_on_log(l_rs, pri.log_rho_s_mean, pri.log_rho_s_var),
            log_normal_on_log(l_rt, pri.log_rho_t_mean, pri.log_rho_t_var),
            log_normal_on_log(l_rl, pri.log_rho_l_mean, pri.log_rho_l_var),
            log_invgamma(l_s2, pri.sigma2_shape, pri.sigma2_scale),
            log_invgamma(l_t2, pri.tau2_shape, pri.tau2_scale),
        )
        for i, (value, g) in enumerate(hyperpriors):
            total += value
            g_h[i] += g
        grad[lay.hyper] = g_h

        if with_grad:
            return total, grad
        return total

    def log_likelihood(self, particle: Particle, batch, total_n: Optional[int] = None,
                       y=None, with_grad: bool = False):
        """
        Gaussian log likelihood of a minibatch, rescaled by total_n / batch size.

        Args:
            particle: Particle
            batch: STPoints with responses, or coordinates together with y
            total_n: Size of the full training set; defaults to the batch size
            y: Responses when batch is a coordinate array
            with_grad: Also return the flat gradient

        Returns:
            Value, or (value, flat gradient)
        """
        X = as_coords(batch)
        y = responses(batch) if y is None else np.asarray(y, dtype=float).ravel()
        n = X.shape[0]
        if y.size != n:
            raise ShapeError("y must have one value per batch point")
        if n == 0:
            raise ParameterError("empty batch")
        scale = (total_n if total_n is not None else n) / n
        log_tau2 = particle.log("tau2")
        tau2 = np.exp(log_tau2)

        Z, cache = self.forward(particle, X, return_cache=True)
        r = y - Z
        rss = float(r @ r)
        value = scale * (-0.5 * n * (np.log(2.0 * np.pi) + log_tau2) - rss / (2.0 * tau2))
        if not np.isfinite(value):
            raise NumericalError("non-finite log likelihood", where="likelihood")
        if not with_grad:
            return value

        lay = self.layout
        grad = np.zeros(lay.size)
        g_z = scale * r / tau2
        C, S = cache["C"], cache["S"]
        grad[lay.a] = C.T @ g_z
        grad[lay.b] = S.T @ g_z
        g_theta = g_z[:, None] * (C * particle.amps.b - S * particle.amps.a)
        grad[lay.freqs] = (g_theta.T @ cache["Xe"]).ravel()
        if self.inr is not None:
            g_latent = (g_theta @ particle.freqs.omega)[:, 3:]
            grad[lay.inr] = self.inr.backward(particle.inr, cache["inr"], g_latent)
        grad[lay.hyper_index("tau2")] = scale * (-0.5 * n + rss / (2.0 * tau2))
        return value, grad

    def log_joint_grad(self, particle: Particle, batch, total_n: Optional[int] = None,
                       y=None) -> LogJoint:
        """
        Log joint of a minibatch and its gradient with respect to every
        particle entry, log-hyperparameters included.
        """
        prior, g_prior = self.log_prior(particle, with_grad=True)
        lik, g_lik = self.log_likelihood(particle, batch, total_n, y, with_grad=True)
        grad = g_prior + g_lik
        if not np.all(np.isfinite(grad)):
            raise NumericalError("non-finite gradient of the log joint", where="gradient")
        return LogJoint(prior, lik, grad)

    # vectors

    def to_vector(self, particle: Particle) -> np.ndarray:
        return self.layout.to_vector(particle)

    def from_vector(self, vec: np.ndarray, encoding: Optional[np.ndarray] = None) -> Particle:
        return self.layout.from_vector(vec, encoding)

    # persistence

    def save_particle(self, particle: Particle) -> bytes:
        """Serialize a particle to a versioned little-endian blob."""
        inr_blob = self.inr.save(particle.inr) if self.inr is not None else b""
        return (pack_header(PARTICLE_MAGIC, config_hash(self.config))
                + pack_bytes(inr_blob)
                + pack_array(particle.freqs.omega)
                + pack_array(particle.amps.vector)
                + pack_array(particle.log_hyper))

    def load_particle(self, blob: bytes, offset: int = 0) -> Tuple[Particle, int]:
        """
        Deserialize a particle written by :meth:`save_particle`.

        Returns:
            (particle, offset just past the blob)
        """
        digest, offset = unpack_header(blob, PARTICLE_MAGIC, offset)
        if digest != config_hash(self.config):
            raise DataError("particle blob was written for a different model configuration")
        inr_blob, offset = unpack_bytes(blob, offset)
        weights = None
        if self.inr is not None:
            weights, _ = self.inr.load(inr_blob)
        omega, offset = unpack_array(blob, offset)
        amps, offset = unpack_array(blob, offset)
        log_hyper, offset = unpack_array(blob, offset)
        J = self.config.J
        if omega.size != J * (3 + self.p) or amps.size != 2 * J:
            raise DataError("particle blob does not match the model dimensions")
        particle = Particle(weights, FrequencySet(omega.reshape(J, 3 + self.p)),
                            AmplitudeSet(amps[:J], amps[J:]), log_hyper)
        return particle, offset

    def describe(self) -> dict:
        """Summary for logs."""
        return {"J": self.config.J, "p": self.p, "dim": self.dim,
                "backbone": None if self.inr is None else self.inr.config.backbone}


def staci_forward(model: StaciModel, particle: Particle, batch) -> np.ndarray:
    """Field values Z of one particle at a batch of locations."""
    return model.forward(particle, batch)


def log_prior(model: StaciModel, particle: Particle) -> float:
    """Log prior of one particle."""
    return model.log_prior(particle)


def log_likelihood(model: StaciModel, particle: Particle, batch, total_n: Optional[int] = None,
                   y=None) -> float:
    """Rescaled minibatch log likelihood of one particle."""
    return model.log_likelihood(particle, batch, total_n, y)


def log_joint_grad(model: StaciModel, particle: Particle, batch, total_n: Optional[int] = None,
                   y=None) -> LogJoint:
    """Log joint and its flat gradient."""
    return model.log_joint_grad(particle, batch, total_n, y)


def particle_to_vector(model: StaciModel, particle: Particle) -> np.ndarray:
    """Flatten a particle in the model's layout."""
    return model.to_vector(particle)


def vector_to_particle(model: StaciModel, vec: np.ndarray,
                       encoding: Optional[np.ndarray] = None) -> Particle:
    """Rebuild a particle from a flat vector."""
    return model.from_vector(vec, encoding)
