"""
Tests for the kernels module.
"""

import math

import numpy as np
import pytest
from scipy import linalg, special

from staci.kernels import (
    CovarianceParams,
    ExactGP,
    STPoint,
    exact_gp_predict,
    exact_gp_simulate,
    expanded_distance,
    matern_correlation,
    matern_covariance,
    st_distance,
)
from staci.utils import NumericalError, ParameterError, ShapeError, SizeError


def bessel_matern(d, nu):
    """Direct evaluation of the Bessel form."""
    x = math.sqrt(2 * nu) * d
    return 2 ** (1 - nu) / special.gamma(nu) * x ** nu * special.kv(nu, x)


class TestCovarianceParams:
    """Test cases for CovarianceParams validation."""

    def test_defaults_valid(self):
        """Default parameters construct."""
        p = CovarianceParams()
        assert p.total_variance == p.sigma2 + p.tau2

    @pytest.mark.parametrize("field", ["nu", "rho_s", "rho_t", "rho_l"])
    def test_nonpositive_rejected(self, field):
        """Ranges and smoothness must be positive."""
        with pytest.raises(ParameterError):
            CovarianceParams(**{field: 0.0})

    def test_negative_variance_rejected(self):
        """Variances may be zero but not negative."""
        CovarianceParams(sigma2=0.0, tau2=0.0)
        with pytest.raises(ParameterError):
            CovarianceParams(tau2=-1.0)

    def test_stpoint_shape(self):
        """Spatial coordinates need two components."""
        with pytest.raises(ShapeError):
            STPoint((0.1, 0.2, 0.3), 0.0)


class TestMaternCorrelation:
    """Test cases for matern_correlation."""

    def test_zero_distance(self):
        """Correlation is exactly one at d = 0."""
        for nu in (0.5, 1.0, 1.5, 2.5, 3.7):
            assert matern_correlation(0.0, nu) == 1.0

    def test_exponential_case(self):
        """nu = 1/2 is the exponential correlation."""
        assert abs(matern_correlation(1.0, 0.5) - math.exp(-1.0)) < 1e-12
        d = np.linspace(0.0, 10.0, 201)
        assert np.max(np.abs(matern_correlation(d, 0.5) - np.exp(-d))) < 1e-10

    def test_tail(self):
        """Correlation decays below 1e-10 far away."""
        assert matern_correlation(50.0, 1.5) < 1e-10

    @pytest.mark.parametrize("nu", [0.5, 1.0, 1.5, 2.5, 0.8])
    def test_matches_bessel_form(self, nu):
        """Closed forms and the general path agree with scipy's Bessel K."""
        d = np.linspace(0.05, 5.0, 40)
        expected = np.array([bessel_matern(x, nu) for x in d])
        assert np.allclose(matern_correlation(d, nu), expected, rtol=1e-9, atol=1e-14)

    @pytest.mark.parametrize("nu", [0.5, 1.0, 1.5, 2.5])
    def test_bounded_and_monotone(self, nu):
        """Values lie in [0, 1] and never increase with distance."""
        values = matern_correlation(np.linspace(0.0, 20.0, 500), nu)
        assert np.all((values >= 0) & (values <= 1))
        assert np.all(np.diff(values) <= 1e-15)

    def test_invalid_inputs(self):
        """Bad smoothness or distances raise."""
        with pytest.raises(ParameterError):
            matern_correlation(1.0, 0.0)
        with pytest.raises(ParameterError):
            matern_correlation(1.0, float("nan"))
        with pytest.raises(ParameterError):
            matern_correlation(-1.0, 1.5)


class TestDistances:
    """Test cases for space-time and expanded distances."""

    def test_identity(self, params):
        """A point is at distance zero from itself."""
        a = STPoint((0.3, 0.7), 2.0)
        assert st_distance(a, a, params) == 0.0

    def test_spatial_arithmetic(self):
        """3-4-5 triangle with rho_s = 0.5."""
        p = CovarianceParams(rho_s=0.5, rho_t=1.0)
        a, b = STPoint((0.0, 0.0), 1.0), STPoint((0.3, 0.4), 1.0)
        assert abs(st_distance(a, b, p) - 1.0) < 1e-12

    def test_temporal_arithmetic(self):
        """Time lag 2 with rho_t = 2."""
        p = CovarianceParams(rho_t=2.0)
        a, b = STPoint((0.5, 0.5), 0.0), STPoint((0.5, 0.5), 2.0)
        assert abs(st_distance(a, b, p) - 1.0) < 1e-12

    def test_expanded_reduces(self, params):
        """Equal latent vectors leave the distance unchanged."""
        a, b = STPoint((0.1, 0.2), 0.3), STPoint((0.6, 0.1), 0.9)
        L = [0.4, -1.0]
        assert abs(expanded_distance(a, b, L, L, params) - st_distance(a, b, params)) < 1e-12

    def test_expanded_latent_arithmetic(self):
        """Latent difference (3, 4) with rho_l = 5."""
        p = CovarianceParams(rho_l=5.0)
        a = STPoint((0.2, 0.2), 0.0)
        assert abs(expanded_distance(a, a, [3.0, 4.0], [0.0, 0.0], p) - 1.0) < 1e-12

    def test_expanded_brute_force(self, params, rng):
        """Matches a term-by-term sum."""
        for _ in range(10):
            xa, xb = rng.uniform(size=3), rng.uniform(size=3)
            La, Lb = rng.normal(size=3), rng.normal(size=3)
            a, b = STPoint(xa[:2], xa[2]), STPoint(xb[:2], xb[2])
            total = ((xa[0] - xb[0]) ** 2 + (xa[1] - xb[1]) ** 2) / params.rho_s ** 2
            total += (xa[2] - xb[2]) ** 2 / params.rho_t ** 2
            total += sum((La - Lb) ** 2) / params.rho_l ** 2
            assert abs(expanded_distance(a, b, La, Lb, params) - math.sqrt(total)) < 1e-12

    def test_mismatched_latent(self, params):
        """Latent vectors of different lengths raise."""
        a = STPoint((0.0, 0.0), 0.0)
        with pytest.raises(ShapeError):
            expanded_distance(a, a, [1.0], [1.0, 2.0], params)

    def test_metric_properties(self, params, rng):
        """Symmetry, dominance and the triangle inequality on random triples."""
        for _ in range(50):
            pts = [STPoint(rng.uniform(size=2), rng.uniform()) for _ in range(3)]
            lat = [rng.normal(size=2) for _ in range(3)]
            d = lambda i, j: expanded_distance(pts[i], pts[j], lat[i], lat[j], params)  # noqa: E731
            assert abs(d(0, 1) - d(1, 0)) < 1e-12
            assert d(0, 1) >= st_distance(pts[0], pts[1], params) - 1e-12
            assert d(0, 2) <= d(0, 1) + d(1, 2) + 1e-12
            s = lambda i, j: st_distance(pts[i], pts[j], params)  # noqa: E731
            assert s(0, 2) <= s(0, 1) + s(1, 2) + 1e-12


class TestExactGP:
    """Test cases for the exact GP oracle."""

    def test_degenerate_zero(self):
        """Zero variances give a zero vector."""
        p = CovarianceParams(sigma2=0.0, tau2=0.0)
        y = exact_gp_simulate(np.random.default_rng(0).uniform(size=(5, 3)), p, seed=1)
        assert np.array_equal(y, np.zeros(5))

    def test_coincident_points(self):
        """Coincident points without nugget get identical responses."""
        p = CovarianceParams(tau2=0.0)
        X = np.array([[0.2, 0.3, 0.5], [0.2, 0.3, 0.5], [0.8, 0.1, 0.0]])
        y = exact_gp_simulate(X, p, seed=3)
        assert abs(y[0] - y[1]) < 1e-10

    def test_deterministic(self, coords, params):
        """Same seed, same draw."""
        assert np.array_equal(exact_gp_simulate(coords, params, seed=5),
                              exact_gp_simulate(coords, params, seed=5))

    def test_size_cap(self, params):
        """Problems above the cap raise SizeError."""
        with pytest.raises(SizeError):
            exact_gp_simulate(np.zeros((11, 3)), params, max_points=10)
        with pytest.raises(SizeError):
            ExactGP(params, max_points=10).predict(np.zeros((11, 3)), np.zeros((1, 3)),
                                                   y=np.zeros(11))

    def test_single_point_variance(self, params):
        """One point has variance sigma2 + tau2 across seeds."""
        X = np.array([[0.5, 0.5, 0.5]])
        draws = np.array([exact_gp_simulate(X, params, seed=s)[0] for s in range(10000)])
        se = params.total_variance * math.sqrt(2.0 / (len(draws) - 1))
        assert abs(draws.var(ddof=1) - params.total_variance) < 4 * se
        assert abs(draws.mean()) < 4 * math.sqrt(params.total_variance / len(draws))

    @pytest.mark.slow
    def test_sample_covariance(self, params):
        """Sample covariance at five points matches the model entrywise."""
        X = np.random.default_rng(4).uniform(size=(5, 3))
        K = matern_covariance(X, X, params) + params.tau2 * np.eye(5)
        n = 20000
        draws = np.vstack([exact_gp_simulate(X, params, seed=s) for s in range(n)])
        S = np.cov(draws, rowvar=False)
        se = np.sqrt((K ** 2 + np.outer(np.diag(K), np.diag(K))) / n)
        assert np.all(np.abs(S - K) < 4 * se)

    def test_noiseless_interpolation(self, params):
        """With tau2 = 0 the mean at a training point is its response."""
        p = CovarianceParams(sigma2=1.0, tau2=0.0, rho_s=0.2, rho_t=0.5)
        X = np.random.default_rng(1).uniform(size=(10, 3))
        y = np.random.default_rng(2).normal(size=10)
        mean, var = exact_gp_predict(X, X[3:4], p, y=y)
        assert abs(mean[0] - y[3]) < 1e-6
        assert var[0] < 1e-6

    def test_prior_reversion(self, params):
        """Far from the data the prediction reverts to the prior."""
        X = np.random.default_rng(1).uniform(size=(10, 3))
        y = np.random.default_rng(2).normal(size=10)
        far = np.array([[100.0, 100.0, 100.0]])
        mean, var = exact_gp_predict(X, far, params, y=y)
        assert abs(mean[0]) < 1e-6
        assert abs(var[0] - params.total_variance) < 1e-6

    def test_dense_solve_oracle(self, params):
        """Kriging equations match a direct dense solve."""
        rng = np.random.default_rng(8)
        X, Xs = rng.uniform(size=(50, 3)), rng.uniform(size=(7, 3))
        y = rng.normal(size=50)
        mean, var = exact_gp_predict(X, Xs, params, y=y)
        K = matern_covariance(X, X, params) + params.tau2 * np.eye(50)
        k = matern_covariance(Xs, X, params)
        expected_mean = k @ np.linalg.solve(K, y)
        expected_var = params.total_variance - np.sum(k * np.linalg.solve(K, k.T).T, axis=1)
        assert np.allclose(mean, expected_mean, atol=1e-8)
        assert np.allclose(var, expected_var, atol=1e-8)
        assert np.all(var >= 0) and np.all(var <= params.total_variance + 1e-8)

    def test_credible_coverage(self, params):
        """95% kriging intervals under the true parameters cover 0.95 +- 0.02 of new draws."""
        z = special.ndtri(0.975)
        covered = []
        for rep in range(250):
            X = np.random.default_rng(rep).uniform(size=(60, 3))
            y = exact_gp_simulate(X, params, seed=1000 + rep)
            mean, var = exact_gp_predict(X[:40], X[40:], params, y=y[:40])
            covered.append(np.abs(y[40:] - mean) <= z * np.sqrt(var))
        coverage = np.mean(covered)
        assert abs(coverage - 0.95) <= 0.02

    def test_stpoints_carry_responses(self, params):
        """Training STPoints supply y when it is omitted."""
        pts = [STPoint((0.1 * i, 0.2), 0.0, float(i)) for i in range(5)]
        mean_a, _ = exact_gp_predict(pts, pts[:2], params)
        mean_b, _ = exact_gp_predict(np.array([p.coords for p in pts]), pts[:2], params,
                                     y=np.arange(5.0))
        assert np.allclose(mean_a, mean_b)

    def test_latent_expansion(self, params):
        """A latent field lowers correlation between otherwise close points."""
        X = np.array([[0.5, 0.5, 0.0], [0.52, 0.5, 0.0]])
        plain = ExactGP(params).covariance(X)
        expanded = ExactGP(params, latent_fn=lambda Z: 10.0 * Z[:, :1]).covariance(X)
        assert expanded[0, 1] < plain[0, 1]
        assert abs(expanded[0, 0] - params.sigma2) < 1e-12

    def test_jitter_escalation(self):
        """A singular matrix is factored after jitter; an indefinite one fails."""
        gp = ExactGP(CovarianceParams(sigma2=1.0, tau2=0.0))
        L = gp.cholesky(np.ones((3, 3)))
        assert np.allclose(L @ L.T, np.ones((3, 3)), atol=1e-3)
        with pytest.raises(NumericalError):
            gp.cholesky(np.array([[1.0, 0.0], [0.0, -1.0]]))
        assert np.allclose(linalg.cholesky(np.eye(2), lower=True), gp.cholesky(np.eye(2)))
