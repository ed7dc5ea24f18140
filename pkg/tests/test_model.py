"""
Tests for the model module.
"""

import itertools

import numpy as np
import pytest
from scipy import stats

from staci.latent import INRConfig
from staci.model import (
    HYPER_NAMES,
    HyperInit,
    ModelConfig,
    PriorConfig,
    StaciModel,
    invgamma_logpdf,
    log_invgamma,
    log_joint_grad,
    log_likelihood,
    log_prior,
    mvt_frequency_prior,
    particle_to_vector,
    staci_forward,
    vector_to_particle,
)
from staci.spectral import rff_evaluate, rff_features
from staci.utils import DataError, NumericalError, ParameterError, ShapeError


def finite_difference(f, x, step=1e-5):
    """Central-difference gradient of a scalar function."""
    grad = np.empty_like(x)
    for i in range(x.size):
        up, down = x.copy(), x.copy()
        up[i] += step
        down[i] -= step
        grad[i] = (f(up) - f(down)) / (2 * step)
    return grad


def assert_gradient(analytic, numeric, tol):
    assert np.all(np.abs(analytic - numeric) <= tol * np.maximum(1.0, np.abs(numeric)))


class TestConfig:
    """Test cases for model configuration."""

    def test_defaults(self):
        """Default model uses J = 200 and p = 8."""
        config = ModelConfig()
        assert config.J == 200
        assert config.latent_dim == 8
        assert config.initial_alpha() == pytest.approx(1 / 64)

    def test_disabled_latent(self):
        """inr = None means p = 0."""
        assert ModelConfig(inr=None).latent_dim == 0

    def test_invalid(self):
        """Invalid counts and priors raise."""
        with pytest.raises(ParameterError):
            ModelConfig(J=0)
        with pytest.raises(ParameterError):
            PriorConfig(alpha_scale=0.0)
        with pytest.raises(ParameterError):
            HyperInit(rho_s=-1.0)


class TestPriors:
    """Test cases for the prior densities."""

    def test_invgamma_value(self):
        """InvGamma(1, 0.05) log density at 0.05 is -log(0.05) - 1."""
        assert abs(invgamma_logpdf(0.05, 1.0, 0.05) - 1.9957) < 1e-4

    def test_log_invgamma_gradient(self):
        """Derivative on the log scale matches central differences."""
        for u in (-3.0, -0.5, 0.0, 1.2):
            _, g = log_invgamma(u, 0.1, 0.1)
            fd = (log_invgamma(u + 1e-6, 0.1, 0.1)[0] - log_invgamma(u - 1e-6, 0.1, 0.1)[0]) / 2e-6
            assert abs(g - fd) < 1e-6

    def test_mvt_value(self, rng):
        """Matches scipy's multivariate t row by row."""
        omega = rng.standard_t(4, size=(6, 5)) * 3.0
        log_nu, lrs, lrt, lrl = np.log([1.7, 0.2, 0.5, 0.3])
        value, _, _ = mvt_frequency_prior(omega, log_nu, lrs, lrt, lrl, 2.0)
        shape = np.diag(1.0 / np.array([0.2, 0.2, 0.5, 0.3, 0.3]) ** 2)
        expected = stats.multivariate_t(loc=np.zeros(5), shape=shape, df=3.4).logpdf(omega).sum()
        assert abs(value - expected) < 1e-9

    def test_mvt_gradients(self, rng, gradient_tolerance):
        """Gradients w.r.t. frequencies and log-hyperparameters match central differences."""
        omega = rng.normal(size=(4, 4)) * 2.0
        h = np.log([1.2, 0.3, 0.6, 0.4])
        _, g_omega, g_h = mvt_frequency_prior(omega, *h, 2.0)
        fd_omega = finite_difference(
            lambda w: mvt_frequency_prior(w.reshape(4, 4), *h, 2.0)[0], omega.ravel())
        fd_h = finite_difference(lambda v: mvt_frequency_prior(omega, *v, 2.0)[0], h)
        assert_gradient(g_omega.ravel(), fd_omega, gradient_tolerance)
        assert_gradient(g_h, fd_h, gradient_tolerance)


class TestForward:
    """Test cases for the network forward pass."""

    def test_composition(self, toy_model, toy_data):
        """Z equals the feature readout on latent-expanded inputs."""
        X, _ = toy_data
        particle = toy_model.init_particle(seed=1)
        L = toy_model.latent(particle, X)
        expected = rff_evaluate(rff_features(X, L, particle.freqs), particle.amps)
        assert np.allclose(staci_forward(toy_model, particle, X), expected, atol=1e-12)

    def test_stationary_reduction(self, stationary_model, toy_data):
        """Without a latent field the features use (s, t) only."""
        X, _ = toy_data
        particle = stationary_model.init_particle(seed=2)
        assert particle.inr is None
        assert particle.freqs.omega.shape == (6, 3)
        expected = rff_evaluate(rff_features(X, None, particle.freqs), particle.amps)
        assert np.allclose(stationary_model.forward(particle, X), expected, atol=1e-12)

    def test_init_deterministic(self, toy_model):
        """Same seed, same particle."""
        a = particle_to_vector(toy_model, toy_model.init_particle(seed=4))
        b = particle_to_vector(toy_model, toy_model.init_particle(seed=4))
        assert np.array_equal(a, b)


class TestLogDensities:
    """Test cases for the log prior and log likelihood."""

    def test_likelihood_single_point(self, toy_model):
        """Residual 1 with tau2 = 1 gives -log(2 pi)/2 - 1/2."""
        particle = toy_model.init_particle(seed=0)
        particle.amps.a[:] = 0.0
        particle.amps.b[:] = 0.0
        particle.log_hyper[HYPER_NAMES.index("tau2")] = 0.0
        value = log_likelihood(toy_model, particle, np.array([[0.3, 0.3, 0.3]]), y=[1.0])
        assert abs(value - (-0.5 * np.log(2 * np.pi) - 0.5)) < 1e-12

    def test_minibatch_unbiased(self, toy_model, toy_data):
        """Averaging the rescaled likelihood over all 3-subsets recovers the full value."""
        X, y = toy_data
        X, y = X[:6], y[:6]
        particle = toy_model.init_particle(seed=3)
        full = toy_model.log_likelihood(particle, X, y=y)
        values = [toy_model.log_likelihood(particle, X[list(idx)], total_n=6, y=y[list(idx)])
                  for idx in itertools.combinations(range(6), 3)]
        assert abs(np.mean(values) - full) < 1e-9 * max(1.0, abs(full))

    def test_prior_matches_scipy(self, toy_model):
        """Log prior equals a term-by-term sum of scipy log densities."""
        particle = toy_model.init_particle(seed=5)
        h = particle.hyper
        pri = toy_model.config.priors
        J = toy_model.config.J
        expected = stats.norm.logpdf(particle.inr.flat, scale=np.sqrt(h["alpha"])).sum()
        scale = np.array([1 / h["rho_s"]] * 2 + [1 / h["rho_t"]] + [1 / h["rho_l"]] * 2)
        mvt = stats.multivariate_t(loc=np.zeros(5), shape=np.diag(scale ** 2), df=2 * h["nu"])
        expected += mvt.logpdf(particle.freqs.omega).sum()
        expected += stats.norm.logpdf(particle.amps.vector, scale=np.sqrt(h["sigma2"] / J)).sum()
        lh = dict(zip(HYPER_NAMES, particle.log_hyper))
        for name in ("alpha", "sigma2", "tau2"):
            shape, scale = getattr(pri, f"{name}_shape"), getattr(pri, f"{name}_scale")
            expected += stats.invgamma.logpdf(h[name], shape, scale=scale) + lh[name]
        for name in ("nu", "rho_s", "rho_t", "rho_l"):
            expected += stats.norm.logpdf(lh[name], getattr(pri, f"log_{name}_mean"),
                                          np.sqrt(getattr(pri, f"log_{name}_var")))
        assert abs(log_prior(toy_model, particle) - expected) < 1e-8 * max(1.0, abs(expected))

    @pytest.mark.parametrize("seed", range(5))
    def test_joint_gradient(self, toy_model, toy_data, seed, gradient_tolerance):
        """Every coordinate of the log-joint gradient matches central differences."""
        X, y = toy_data
        particle = toy_model.init_particle(seed=seed)
        encoding = None if particle.inr is None else particle.inr.encoding
        vec = particle_to_vector(toy_model, particle)
        assert toy_model.dim < 500

        def value(v):
            return toy_model.log_joint_grad(vector_to_particle(toy_model, v, encoding), X,
                                            total_n=40, y=y).value

        result = log_joint_grad(toy_model, particle, X, total_n=40, y=y)
        assert_gradient(result.grad, finite_difference(value, vec), gradient_tolerance)

    @pytest.mark.parametrize("backbone", ["ffnp", "ffng"])
    def test_joint_gradient_backbones(self, backbone, toy_data, gradient_tolerance):
        """Gradients are exact for the encoded backbones too."""
        config = INRConfig(backbone=backbone, layers=2, width=4, latent_dim=2,
                           ffnp_freq_count=2, ffnp_freq_constant=1.0, ffng_encode_size=3)
        model = StaciModel(ModelConfig(J=4, inr=config))
        X, y = toy_data
        particle = model.init_particle(seed=9)
        encoding = particle.inr.encoding
        result = model.log_joint_grad(particle, X, y=y)
        fd = finite_difference(
            lambda v: model.log_joint_grad(model.from_vector(v, encoding), X, y=y).value,
            model.to_vector(particle))
        assert_gradient(result.grad, fd, gradient_tolerance)

    def test_stationary_gradient(self, stationary_model, toy_data, gradient_tolerance):
        """Gradient check with p = 0."""
        X, y = toy_data
        particle = stationary_model.init_particle(seed=1)
        result = stationary_model.log_joint_grad(particle, X, y=y)
        fd = finite_difference(lambda v: stationary_model.log_joint_grad(
            stationary_model.from_vector(v), X, y=y).value, stationary_model.to_vector(particle))
        assert_gradient(result.grad, fd, gradient_tolerance)

    @pytest.mark.slow
    def test_joint_gradient_many_restarts(self, toy_model, toy_data, gradient_tolerance):
        """Gradient check over one hundred initializations."""
        X, y = toy_data
        for seed in range(100):
            particle = toy_model.init_particle(seed=seed)
            result = toy_model.log_joint_grad(particle, X, y=y)
            fd = finite_difference(lambda v: toy_model.log_joint_grad(
                toy_model.from_vector(v), X, y=y).value, toy_model.to_vector(particle))
            assert_gradient(result.grad, fd, gradient_tolerance)

    def test_non_finite(self, toy_model, toy_data):
        """Overflowing noise variance raises NumericalError."""
        X, y = toy_data
        particle = toy_model.init_particle(seed=0)
        particle.log_hyper[HYPER_NAMES.index("tau2")] = -1e6
        with pytest.raises(NumericalError):
            toy_model.log_likelihood(particle, X, y=y)

    def test_batch_checks(self, toy_model, toy_data):
        """Mismatched responses raise ShapeError."""
        X, y = toy_data
        particle = toy_model.init_particle(seed=0)
        with pytest.raises(ShapeError):
            toy_model.log_likelihood(particle, X, y=y[:-1])


class TestLayout:
    """Test cases for the flat particle layout."""

    def test_round_trip(self, toy_model):
        """Flatten then rebuild is the identity."""
        particle = toy_model.init_particle(seed=6)
        vec = toy_model.to_vector(particle)
        back = toy_model.from_vector(vec, particle.inr.encoding)
        assert np.array_equal(toy_model.to_vector(back), vec)

    def test_block_order(self, toy_model):
        """Hyperparameters sit last, in HYPER_NAMES order."""
        particle = toy_model.init_particle(seed=6)
        vec = toy_model.to_vector(particle)
        lay = toy_model.layout
        assert np.array_equal(vec[lay.hyper], particle.log_hyper)
        assert vec[lay.hyper_index("tau2")] == particle.log("tau2")
        assert np.array_equal(vec[lay.freqs], particle.freqs.omega.ravel())
        assert lay.size == toy_model.inr.n_params + 5 * 5 + 10 + 7

    def test_masks(self, toy_inr_config):
        """Frozen blocks leave the trainable mask; hyperparameters never decay."""
        model = StaciModel(ModelConfig(J=5, inr=toy_inr_config, freeze_frequencies=True,
                                       freeze_hyper=True))
        lay = model.layout
        trainable = lay.trainable_mask()
        assert not trainable[lay.freqs].any()
        assert not trainable[lay.hyper].any()
        assert trainable[lay.inr].all() and trainable[lay.a].all()
        assert not lay.decay_mask()[lay.hyper].any()

    def test_wrong_length(self, toy_model):
        """Vectors of the wrong size raise."""
        with pytest.raises(ShapeError):
            toy_model.from_vector(np.zeros(3))


class TestPersistence:
    """Test cases for particle blobs."""

    def test_round_trip(self, toy_model):
        """Particles load back bit for bit."""
        particle = toy_model.init_particle(seed=7)
        blob = toy_model.save_particle(particle)
        loaded, offset = toy_model.load_particle(blob)
        assert offset == len(blob)
        assert np.array_equal(toy_model.to_vector(loaded), toy_model.to_vector(particle))

    def test_other_config_rejected(self, toy_model, stationary_model):
        """Blobs carry the configuration hash."""
        blob = toy_model.save_particle(toy_model.init_particle(seed=0))
        with pytest.raises(DataError):
            stationary_model.load_particle(blob)
