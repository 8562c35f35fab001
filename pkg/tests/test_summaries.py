"""Posterior-summary and predictive-evaluation tests."""

import numpy as np
import pytest

from pepglm.dataset import build_dataset
from pepglm.exceptions import ConfigurationError
from pepglm.families import GlmFamily
from pepglm.priors import BaselinePrior, DeltaPrior
from pepglm.sampler import ChainOutput, SamplerConfig, run_chain
from pepglm.summaries import half_split, predictive_eval, summarize


def _fake_chain(gamma_draws, delta=532.0, config=None):
    draws = np.asarray(gamma_draws, dtype=np.uint8)
    visited = {}
    for row in draws:
        key = tuple(int(v) for v in row)
        visited[key] = visited.get(key, 0) + 1
    return ChainOutput(
        gamma_draws=draws,
        delta_draws=np.full(draws.shape[0], delta),
        acceptance_rates={"beta": 1.0},
        visited_models=visited,
        diagnostics={},
        config=config,
    )


class TestSummarize:
    def test_always_included_predictor(self):
        chain = _fake_chain(np.ones((4000, 2)))
        s = summarize(chain, batch_size=1000)
        assert s.inclusion_probs[0] == 1.0
        assert s.map_model == (1, 1)
        assert s.mpm_model == (1, 1)

    def test_fixed_delta_shrinkage_constant(self):
        chain = _fake_chain(np.ones((2000, 1)), delta=532.0)
        s = summarize(chain, batch_size=500)
        assert round(s.shrinkage_mean, 3) == 0.998
        assert all(round(v, 3) == 0.998 for v in s.shrinkage_quantiles.values())

    def test_half_inclusion_and_batches(self):
        draws = np.zeros((40000, 1), dtype=np.uint8)
        draws[::2] = 1
        s = summarize(_fake_chain(draws), batch_size=1000)
        assert s.inclusion_probs[0] == pytest.approx(0.5)
        assert s.batch_estimates.shape == (40, 1)
        assert s.batch_estimates.mean() == pytest.approx(0.5)

    def test_batch_mean_equals_full_mean_when_tiling(self):
        rng = np.random.default_rng(0)
        draws = (rng.random((12000, 3)) < 0.3).astype(np.uint8)
        s = summarize(_fake_chain(draws), batch_size=1000)
        np.testing.assert_allclose(
            s.batch_estimates.mean(axis=0), s.inclusion_probs, atol=1e-12
        )

    def test_partial_batch_dropped_with_warning(self):
        draws = np.ones((2500, 1), dtype=np.uint8)
        with pytest.warns(UserWarning, match="partial batch"):
            s = summarize(_fake_chain(draws), batch_size=1000)
        assert s.batch_estimates.shape == (2, 1)

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(1)
        draws = (rng.random((3000, 4)) < [0.2, 0.5, 0.7, 0.9]).astype(np.uint8)
        perm = [2, 0, 3, 1]
        s = summarize(_fake_chain(draws), batch_size=500)
        sp = summarize(_fake_chain(draws[:, perm]), batch_size=500)
        np.testing.assert_allclose(sp.inclusion_probs, s.inclusion_probs[perm])
        assert sp.map_model == tuple(np.array(s.map_model)[perm])

    def test_map_has_max_visits(self):
        rng = np.random.default_rng(2)
        draws = (rng.random((5000, 3)) < 0.4).astype(np.uint8)
        chain = _fake_chain(draws)
        s = summarize(chain, batch_size=500)
        assert s.map_visits == max(chain.visited_models.values())

    def test_map_tie_breaks_lexicographically(self):
        draws = np.array([[0, 1], [1, 0]] * 50, dtype=np.uint8)
        s = summarize(_fake_chain(draws), batch_size=10)
        assert s.map_model == (0, 1)

    def test_mpm_excludes_exact_half(self):
        draws = np.zeros((1000, 2), dtype=np.uint8)
        draws[:500, 0] = 1
        draws[:, 1] = 1
        s = summarize(_fake_chain(draws), batch_size=100)
        assert s.mpm_model == (0, 1)

    def test_model_probs_sum_to_one(self):
        rng = np.random.default_rng(3)
        draws = (rng.random((4000, 3)) < 0.5).astype(np.uint8)
        s = summarize(_fake_chain(draws), batch_size=1000)
        assert sum(s.model_probs.values()) == pytest.approx(1.0, abs=1e-12)

    def test_empty_chain_rejected(self):
        with pytest.raises(ConfigurationError):
            summarize(_fake_chain(np.zeros((0, 1))), batch_size=10)


class TestHalfSplit:
    def test_split_sizes_and_centering(self):
        rng = np.random.default_rng(4)
        X = rng.standard_normal((101, 3)) + 5.0
        y = (rng.random(101) < 0.4).astype(float)
        ds = build_dataset(y, X)
        train, (X_test, y_test, _) = half_split(ds, seed=3)
        assert train.n == 50 and y_test.shape[0] == 51
        assert np.max(np.abs(train.X[:, 1:].mean(axis=0))) < 1e-10
        # test columns are shifted by the training means, not their own
        raw_test = X_test[:, 1:] + train.centers
        assert np.max(np.abs(raw_test.mean(axis=0) - 5.0)) < 1.0

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        ds = build_dataset((rng.random(40) < 0.5).astype(float),
                           rng.standard_normal((40, 2)))
        a_train, a_test = half_split(ds, seed=7)
        b_train, b_test = half_split(ds, seed=7)
        np.testing.assert_array_equal(a_train.y, b_train.y)
        np.testing.assert_array_equal(a_test[0], b_test[0])


class TestPredictiveEval:
    def _chain_on(self, train, seed=0):
        cfg = SamplerConfig(
            family=GlmFamily("binomial"),
            iterations=800,
            burn_in=200,
            seed=seed,
            delta_prior=DeltaPrior("fixed"),
            baseline=BaselinePrior("jeffreys"),
        )
        return run_chain(cfg, train)

    def test_null_model_balanced_labels_quarter_rates(self):
        rng = np.random.default_rng(6)
        n = 400
        X = rng.standard_normal((n, 1)) * 1e-8  # no signal
        y = np.repeat([0.0, 1.0], n // 2)
        ds = build_dataset(y, X)
        train, test = half_split(ds, seed=1)
        chain = self._chain_on(train)
        fn, fp = predictive_eval(chain, (0,), train, test, n_draws=400, seed=2)
        assert fn == pytest.approx(25.0, abs=4.0)
        assert fp == pytest.approx(25.0, abs=4.0)

    def test_strong_signal_rates_vanish(self):
        rng = np.random.default_rng(7)
        n = 300
        x = rng.standard_normal(n)
        y = (x > 0).astype(float)  # perfectly separated by a huge effect
        ds = build_dataset(y, 10.0 * x[:, None])
        train, test = half_split(ds, seed=1)
        chain = self._chain_on(train)
        fn, fp = predictive_eval(chain, (1,), train, test, n_draws=300, seed=3)
        assert fn < 3.0 and fp < 3.0

    def test_empty_test_rejected(self):
        rng = np.random.default_rng(8)
        ds = build_dataset((rng.random(30) < 0.5).astype(float),
                           rng.standard_normal((30, 1)))
        chain = self._chain_on(ds)
        with pytest.raises(ConfigurationError):
            predictive_eval(chain, (1,), ds,
                            (np.empty((0, 2)), np.empty(0), None))

    def test_hard_threshold_option(self):
        rng = np.random.default_rng(9)
        n = 200
        x = rng.standard_normal(n)
        y = (rng.random(n) < 1 / (1 + np.exp(-2 * x))).astype(float)
        ds = build_dataset(y, x[:, None])
        train, test = half_split(ds, seed=2)
        chain = self._chain_on(train)
        fn_soft, fp_soft = predictive_eval(chain, (1,), train, test,
                                           n_draws=200, seed=4)
        fn_hard, fp_hard = predictive_eval(chain, (1,), train, test,
                                           n_draws=200, seed=4,
                                           hard_threshold=True)
        # randomized prediction cannot beat thresholding on average
        assert fn_hard + fp_hard <= fn_soft + fp_soft + 1.0
