"""
Tests for the predict module.
"""

import numpy as np
import pytest

from staci.model import ModelConfig, StaciModel
from staci.predict import (
    DEFAULT_CANDIDATES,
    PREDICTION_COLUMNS,
    NeighborIndex,
    StaciPredictor,
    choose_D,
    conformal_bands,
    conformal_interval,
    conformal_rank,
    credible_interval,
    interval_scores_by_D,
    loo_draws,
    neighbor_select,
    particle_leverage,
    plausibility,
    posterior_mean_var,
    summarize_draws,
)
from staci.spectral import AmplitudeSet
from staci.svgd import init_ensemble
from staci.utils import ParameterError, ShapeError


class TestSummary:
    """Test cases for posterior summaries."""

    def test_mean_and_variance(self):
        """Draws 1, 2, 3 with tau2 = 0.5: mean 2, variance 2/3 + 0.5."""
        mean, var = posterior_mean_var(np.array([[1.0], [2.0], [3.0]]), 0.5)
        assert abs(mean[0] - 2.0) < 1e-12
        assert abs(var[0] - (2.0 / 3.0 + 0.5)) < 1e-12

    def test_single_particle(self):
        """One particle gives the nugget alone, with a warning."""
        with pytest.warns(RuntimeWarning):
            mean, var = posterior_mean_var(np.array([[4.0, 5.0]]), 0.2)
        assert np.allclose(mean, [4.0, 5.0])
        assert np.allclose(var, [0.2, 0.2])

    def test_credible_interval(self):
        """alpha = 0.05 gives half-width 1.959964 sd; alpha = 0.3173 about one sd."""
        lo, hi = credible_interval(np.array([0.0]), np.array([1.0]), 0.05)
        assert abs(hi[0] - 1.959964) < 1e-6 and abs(lo[0] + 1.959964) < 1e-6
        lo, hi = credible_interval(np.array([2.0]), np.array([1.0]), 0.3173)
        assert abs(hi[0] - 3.0) < 1e-3

    def test_invalid_alpha(self):
        """alpha outside (0, 1) raises."""
        with pytest.raises(ParameterError):
            credible_interval(np.zeros(1), np.ones(1), 0.0)

    def test_summarize(self, rng):
        """Bounds bracket the mean and sd includes the nugget."""
        s = summarize_draws(rng.normal(size=(5, 8)), 0.3)
        assert np.all(s.lower <= s.mean) and np.all(s.mean <= s.upper)
        assert np.all(s.sd >= np.sqrt(0.3) - 1e-12)
        assert len(s) == 8


class TestNeighbors:
    """Test cases for the neighbour index."""

    def test_single_neighbor(self):
        """D = 1 returns the closest point."""
        train = np.array([[0.0, 0.0, 0.0], [0.5, 0.5, 0.0], [0.9, 0.9, 0.0]])
        assert neighbor_select([0.6, 0.6, 0.0], train, 1, 0.1, 1.0)[0] == 1

    def test_temporal_scaling(self):
        """A short time range makes the temporal gap dominate."""
        train = np.array([[0.0, 0.0, 1.0], [0.3, 0.0, 0.0]])
        query = [0.0, 0.0, 0.0]
        assert neighbor_select(query, train, 1, rho_s=1.0, rho_t=0.01)[0] == 1
        assert neighbor_select(query, train, 1, rho_s=0.01, rho_t=1.0)[0] == 0

    def test_rescaling_invariance(self, rng):
        """Scaling both ranges by the same factor leaves neighbours unchanged."""
        train = rng.uniform(size=(300, 3))
        Q = rng.uniform(size=(10, 3))
        a = NeighborIndex(train, 0.2, 0.5).query(Q, 15)
        b = NeighborIndex(train, 0.2 * 7.0, 0.5 * 7.0).query(Q, 15)
        assert np.array_equal(a, b)

    def test_ties_lower_index(self):
        """Equidistant points are ordered by index."""
        train = np.array([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0]])
        assert list(neighbor_select([0.0, 0.0, 0.0], train, 3, 1.0, 1.0)) == [0, 1, 2]

    def test_tree_matches_brute_force(self, rng):
        """kd-tree results equal a full scan, random data."""
        train = rng.uniform(size=(2500, 3))
        Q = rng.uniform(size=(25, 3))
        tree = NeighborIndex(train, 0.1, 0.3)
        brute = NeighborIndex(train, 0.1, 0.3, brute_force_below=10 ** 9)
        assert tree.uses_tree and not brute.uses_tree
        assert np.array_equal(tree.query(Q, 20), brute.query(Q, 20))

    def test_tree_matches_brute_force_with_ties(self):
        """kd-tree results equal a full scan on a lattice full of ties."""
        g = np.arange(45) / 44.0
        s1, s2 = np.meshgrid(g, g, indexing="ij")
        train = np.column_stack([s1.ravel(), s2.ravel(), np.zeros(s1.size)])
        Q = np.array([[0.5, 0.5, 0.0], [g[3], g[10], 0.0], [(g[7] + g[8]) / 2, g[20], 0.0],
                      [(g[1] + g[2]) / 2, (g[30] + g[31]) / 2, 0.0]])
        tree = NeighborIndex(train, 0.1, 0.3, brute_force_below=0)
        brute = NeighborIndex(train, 0.1, 0.3, brute_force_below=10 ** 9)
        for D in (1, 4, 9, 13):
            assert np.array_equal(tree.query(Q, D), brute.query(Q, D))

    def test_update_tolerance(self, rng):
        """Small range changes keep the index; larger ones rebuild it."""
        index = NeighborIndex(rng.uniform(size=(20, 3)), 0.1, 0.3)
        assert not index.update(0.1005, 0.3)
        assert index.update(0.2, 0.3)
        assert index.rho_s == 0.2

    def test_invalid_D(self, rng):
        """D must lie in [1, n]."""
        index = NeighborIndex(rng.uniform(size=(5, 3)), 0.1, 0.3)
        with pytest.raises(ParameterError):
            index.query(np.zeros((1, 3)), 6)
        with pytest.raises(ParameterError):
            index.query(np.zeros((1, 3)), 0)


class TestConformal:
    """Test cases for conformal bands."""

    def test_rank(self):
        """Ranks at common levels."""
        assert conformal_rank(19, 0.05) == 19
        assert conformal_rank(99, 0.1) == 90
        assert conformal_rank(5, 0.05) == 6

    def test_equal_scores(self):
        """All neighbour scores c: band mean +/- c sd."""
        nb_y = np.array([2.0, -2.0, 2.0, -2.0] * 5)
        band = conformal_interval(1.0, 0.5, nb_y, np.zeros(20), np.ones(20), alpha=0.1)
        assert abs(band.lower - 0.0) < 1e-12 and abs(band.upper - 2.0) < 1e-12
        assert band.q == 2.0 and not band.fallback

    def test_largest_score(self):
        """K = 19 at alpha = 0.05 selects the largest score."""
        scores = np.arange(1.0, 20.0)
        band = conformal_interval(0.0, 1.0, scores, np.zeros(19), np.ones(19), alpha=0.05)
        assert band.q == 19.0

    def test_plausibility(self):
        """p(y) counts neighbour scores at least as large."""
        p = plausibility([0.0, 1.5, 10.0], 0.0, 1.0, np.array([1.0, 2.0, 3.0]))
        assert np.allclose(p, [1.0, 0.75, 0.25])

    def test_grid_agrees_with_closed_form(self):
        """Grid search and order statistic agree within one grid spacing."""
        rng = np.random.default_rng(21)
        for _ in range(500):
            nb_y = rng.uniform(-10, 10, 99)
            nb_mean = nb_y - rng.normal(size=99)
            nb_sd = np.ones(99)
            closed = conformal_interval(0.0, 1.0, nb_y, nb_mean, nb_sd, alpha=0.1)
            grid = conformal_interval(0.0, 1.0, nb_y, nb_mean, nb_sd, alpha=0.1, mode="grid")
            spacing = (nb_y.max() - nb_y.min()) / 2000
            assert abs(closed.lower - grid.lower) <= spacing + 1e-12
            assert abs(closed.upper - grid.upper) <= spacing + 1e-12

    def test_fallback(self):
        """Too few neighbours: the band spans the neighbour responses and the mean."""
        with pytest.warns(RuntimeWarning):
            band = conformal_interval(5.0, 1.0, [0.0, 1.0, 2.0, 3.0, 4.0], np.zeros(5),
                                      np.ones(5), alpha=0.05)
        assert band.fallback
        assert (band.lower, band.upper) == (0.0, 5.0)

    def test_band_scales_with_sd(self, rng):
        """Width is linear in the query sd and the band contains the mean."""
        nb_y, nb_mean = rng.normal(size=30), rng.normal(size=30)
        nb_sd = np.full(30, 0.8)
        narrow = conformal_interval(0.3, 1.0, nb_y, nb_mean, nb_sd, alpha=0.2)
        wide = conformal_interval(0.3, 3.0, nb_y, nb_mean, nb_sd, alpha=0.2)
        assert abs(wide.width - 3.0 * narrow.width) < 1e-12
        assert narrow.lower <= 0.3 <= narrow.upper

    def test_invalid(self):
        """Non-positive sds and unknown modes raise."""
        with pytest.raises(ParameterError):
            conformal_interval(0.0, 0.0, [1.0], [0.0], [1.0], 0.5)
        with pytest.raises(ParameterError):
            conformal_interval(0.0, 1.0, [1.0], [0.0], [0.0], 0.5)
        with pytest.raises(ParameterError):
            conformal_interval(0.0, 1.0, [1.0], [0.0], [1.0], 0.5, mode="bisect")

    def test_vectorized_matches_single(self, rng):
        """Batch bands equal per-query bands."""
        n = 60
        y, mean, sd = rng.normal(size=n), rng.normal(size=n), rng.uniform(0.5, 1.5, n)
        neighbors = np.array([rng.choice(n, 25, replace=False) for _ in range(4)])
        mq, sq = rng.normal(size=4), rng.uniform(0.5, 1.5, 4)
        lower, upper, q, fallback = conformal_bands(mq, sq, neighbors, y, mean, sd, 0.1)
        for i in range(4):
            nb = neighbors[i]
            band = conformal_interval(mq[i], sq[i], y[nb], mean[nb], sd[nb], 0.1)
            assert abs(band.lower - lower[i]) < 1e-12 and abs(band.upper - upper[i]) < 1e-12
        assert not fallback.any()

    def test_marginal_coverage(self):
        """Exchangeable scores give coverage of at least 1 - alpha."""
        rng = np.random.default_rng(5)
        n_q, K = 5000, 99
        y_train = rng.normal(size=n_q * K)
        neighbors = np.arange(n_q * K).reshape(n_q, K)
        y_q = rng.normal(size=n_q)
        lower, upper, _, _ = conformal_bands(np.zeros(n_q), np.ones(n_q), neighbors, y_train,
                                             np.zeros(n_q * K), np.ones(n_q * K), 0.05)
        coverage = np.mean((y_q >= lower) & (y_q <= upper))
        assert coverage >= 0.94


class TestChooseD:
    """Test cases for the neighbour-count search."""

    def test_single_candidate(self, rng):
        """One candidate is returned as is."""
        X = rng.uniform(size=(50, 3))
        assert choose_D(X, rng.normal(size=50), np.zeros(50), np.ones(50), 0.1, 0.3,
                        candidates=[30]) == 30

    def test_deterministic_choice(self, rng):
        """Seeded search returns one of the candidates, the same each time."""
        X = rng.uniform(size=(200, 3))
        y = np.sin(6 * X[:, 0]) + 0.1 * rng.normal(size=200)
        mean, sd = np.sin(6 * X[:, 0]), np.full(200, 0.1)
        args = (X, y, mean, sd, 0.2, 0.5)
        first = choose_D(*args, candidates=(20, 40, 60), seed=3)
        assert first in (20, 40, 60)
        assert choose_D(*args, candidates=(20, 40, 60), seed=3) == first

    def test_too_few_points(self, rng):
        """Every candidate larger than the data raises."""
        X = rng.uniform(size=(10, 3))
        with pytest.raises(ParameterError):
            choose_D(X, np.zeros(10), np.zeros(10), np.ones(10), 0.1, 0.3, candidates=[30, 40])

    def test_plateau_on_iid_data(self):
        """Exchangeable responses give nearly equal scores across the default candidates."""
        rng = np.random.default_rng(17)
        X = rng.uniform(size=(1500, 3))
        y = rng.normal(size=1500)
        args = (X, y, np.zeros(1500), np.ones(1500), 0.1, 0.3)
        scores = interval_scores_by_D(*args, n_holdout=500, seed=2)
        assert list(scores.index) == list(DEFAULT_CANDIDATES)
        assert scores.max() <= 1.15 * scores.min()
        chosen = choose_D(*args, n_holdout=500, seed=2)
        assert chosen == scores.idxmin()
        assert 30 <= chosen <= 80


class TestPredictor:
    """Test cases for StaciPredictor."""

    @pytest.fixture
    def predictor(self, toy_model, rng):
        X = rng.uniform(size=(60, 3))
        y = np.cos(3 * X[:, 1]) + 0.1 * rng.normal(size=60)
        return StaciPredictor(toy_model, init_ensemble(toy_model, 3, seed=0), X, y,
                              alpha=0.05, D=30, workers=1)

    def test_table(self, predictor, rng):
        """Prediction table columns and interval ordering."""
        Q = rng.uniform(size=(10, 3))
        table = predictor.predict(Q)
        assert not predictor.conformal(Q)[3].any()
        assert list(table.columns) == list(PREDICTION_COLUMNS)
        assert table["y_true"].isna().all()
        for lo, hi in (("bayes_lo", "bayes_hi"), ("conf_lo", "conf_hi")):
            assert np.all(table[lo] <= table["mean"]) and np.all(table["mean"] <= table[hi])
        assert np.all(table["sd"] >= np.sqrt(predictor.tau2_hat) - 1e-12)

    def test_workers(self, predictor, rng):
        """Threaded draws equal sequential ones."""
        Q = rng.uniform(size=(7, 3))
        sequential = predictor.draws(Q)
        predictor.workers = 3
        assert np.array_equal(predictor.draws(Q), sequential)

    def test_estimates(self, predictor):
        """Range and nugget estimates are particle means on the natural scale."""
        hyper = np.exp(predictor.ensemble.theta[:, predictor.model.layout.hyper])
        assert abs(predictor.tau2_hat - hyper[:, 6].mean()) < 1e-15
        assert predictor.rho_hat == (hyper[:, 2].mean(), hyper[:, 3].mean())

    def test_choose_D_adopted(self, predictor):
        """Cross-validated D becomes the default."""
        D = predictor.choose_D(candidates=(10, 20), alpha=0.2)
        assert predictor.D == D and D in (10, 20)

    def test_loo_calibration(self, toy_model, rng):
        """With loo calibration the score summaries come from leave-one-out values."""
        X = rng.uniform(size=(40, 3))
        y = np.sin(4 * X[:, 0]) + 0.1 * rng.normal(size=40)
        ensemble = init_ensemble(toy_model, 3, seed=1)
        predictor = StaciPredictor(toy_model, ensemble, X, y, D=20, workers=1,
                                   calibration="loo")
        draws = loo_draws(toy_model, ensemble.particles(toy_model), X, y)
        assert np.allclose(predictor.train_summary.mean, draws.mean(axis=0), atol=1e-12)
        lower, upper, _, _ = predictor.conformal(rng.uniform(size=(5, 3)))
        assert np.all(lower <= upper)
        with pytest.raises(ParameterError):
            StaciPredictor(toy_model, ensemble, X, y, calibration="refit")


class TestLeaveOneOut:
    """Test cases for leave-one-out values of the amplitude block."""

    @pytest.fixture
    def fitted(self, rng):
        """A particle whose amplitudes sit at their conditional posterior mean."""
        J = 6
        model = StaciModel(ModelConfig(J=J, inr=None))
        particle = model.init_particle(seed=4)
        X = rng.uniform(size=(25, 3))
        y = rng.normal(size=25)
        _, cache = model.forward(particle, X, return_cache=True)
        Phi = np.hstack([cache["C"], cache["S"]])
        hyper = particle.hyper
        ridge = np.eye(2 * J) * hyper["tau2"] * J / hyper["sigma2"]
        w = np.linalg.solve(Phi.T @ Phi + ridge, Phi.T @ y)
        particle.amps = AmplitudeSet(w[:J], w[J:])
        return model, particle, X, y, Phi, ridge

    def test_matches_refit(self, fitted):
        """Each value equals the prediction of a ridge fit without that point."""
        model, particle, X, y, Phi, ridge = fitted
        values = loo_draws(model, [particle], X, y)[0]
        for i in range(len(y)):
            keep = np.arange(len(y)) != i
            w = np.linalg.solve(Phi[keep].T @ Phi[keep] + ridge, Phi[keep].T @ y[keep])
            assert abs(values[i] - Phi[i] @ w) < 1e-8

    def test_leverage(self, fitted):
        """Leverages lie in (0, 1) and sum to the trace of the hat matrix."""
        model, particle, X, y, Phi, ridge = fitted
        f, h = particle_leverage(model, particle, X, chunk=7)
        assert np.allclose(f, model.forward(particle, X), atol=1e-12)
        assert np.all((h > 0) & (h < 1))
        hat = Phi @ np.linalg.solve(Phi.T @ Phi + ridge, Phi.T)
        assert abs(h.sum() - np.trace(hat)) < 1e-8

    def test_length_mismatch(self, fitted):
        """One response per training point is required."""
        model, particle, X, y, _, _ = fitted
        with pytest.raises(ShapeError):
            loo_draws(model, [particle], X, y[:-1])
