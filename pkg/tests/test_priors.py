"""Prior-stack tests: normalization, stated values, oracle comparisons."""

import itertools

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import beta as beta_dist
from scipy.stats import multivariate_normal

from pepglm.exceptions import ConfigurationError
from pepglm.families import binomial, gaussian, irls_fit, poisson
from pepglm.priors import (
    BaselinePrior,
    DeltaPrior,
    GPriorConfig,
    ModelPrior,
    log_baseline_prior,
    log_delta_prior,
    log_g_hyperprior,
    log_gprior_density,
    log_model_prior,
)


class TestBaselinePrior:
    def test_flat_is_zero(self):
        rng = np.random.default_rng(0)
        X = np.column_stack([np.ones(6), rng.standard_normal(6)])
        assert log_baseline_prior(BaselinePrior("flat"), binomial(), X,
                                  rng.normal(size=2)) == 0.0

    def test_jeffreys_gaussian_constant_in_beta(self):
        rng = np.random.default_rng(1)
        X = np.column_stack([np.ones(7), rng.standard_normal((7, 2))])
        expected = 0.5 * np.linalg.slogdet(X.T @ X)[1]
        for beta in (np.zeros(3), rng.normal(size=3)):
            got = log_baseline_prior(BaselinePrior("jeffreys"), gaussian(), X, beta)
            assert got == pytest.approx(expected, rel=1e-12)

    def test_jeffreys_logistic_null_at_zero(self):
        X = np.ones((4, 1))
        got = log_baseline_prior(BaselinePrior("jeffreys"), binomial(), X, np.zeros(1))
        assert got == pytest.approx(0.0, abs=1e-12)

    def test_jeffreys_column_permutation_invariant(self):
        rng = np.random.default_rng(2)
        X = np.column_stack([np.ones(9), rng.standard_normal((9, 3))])
        beta = rng.normal(size=4)
        base = log_baseline_prior(BaselinePrior("jeffreys"), binomial(), X, beta)
        perm = [0, 2, 3, 1]
        got = log_baseline_prior(BaselinePrior("jeffreys"), binomial(),
                                 X[:, perm], beta[perm])
        assert got == pytest.approx(base, rel=1e-12)


class TestDeltaPrior:
    def test_stated_values(self):
        assert log_delta_prior(DeltaPrior("hyper", a=3.0), 1e-12) == \
            pytest.approx(np.log(0.5), abs=1e-9)
        assert log_delta_prior(DeltaPrior("hyper", a=4.0), 1.0) == \
            pytest.approx(np.log(0.25), abs=1e-12)
        assert log_delta_prior(DeltaPrior("hyper-n", a=3.0, n=100), 1e-12) == \
            pytest.approx(np.log(0.005), abs=1e-9)

    @pytest.mark.parametrize("dp", [
        DeltaPrior("hyper", a=3.0),
        DeltaPrior("hyper", a=4.0),
        DeltaPrior("hyper-n", a=3.0, n=100),
        DeltaPrior("hyper-n", a=2.5, n=17),
    ])
    def test_normalization(self, dp):
        val, _ = quad(lambda d: np.exp(log_delta_prior(dp, d)), 0, np.inf, limit=200)
        assert val == pytest.approx(1.0, abs=1e-6)

    def test_shrinkage_is_beta(self):
        # delta/(1+delta) ~ Beta(1, a/2 - 1) under the plain hyper prior.
        a = 3.0
        dp = DeltaPrior("hyper", a=a)
        for t in (0.1, 0.4, 0.9):
            # transform density: pi_t(t) = pi_delta(t/(1-t)) / (1-t)^2
            direct = np.exp(log_delta_prior(dp, t / (1 - t))) / (1 - t) ** 2
            assert direct == pytest.approx(beta_dist.pdf(t, 1.0, a / 2 - 1),
                                           rel=1e-10)

    def test_bad_a_rejected(self):
        with pytest.raises(ConfigurationError):
            DeltaPrior("hyper", a=2.0)


class TestModelPrior:
    def test_uniform_value(self):
        mp = ModelPrior("uniform", 5)
        assert log_model_prior(mp, np.zeros(5)) == pytest.approx(np.log(1 / 32))

    def test_beta_binomial_values(self):
        mp = ModelPrior("beta-binomial", 7)
        g2 = np.array([1, 1, 0, 0, 0, 0, 0])
        assert log_model_prior(mp, g2) == pytest.approx(np.log(1 / 168), rel=1e-12)
        assert log_model_prior(mp, np.zeros(7)) == pytest.approx(np.log(1 / 8),
                                                                 rel=1e-12)

    @pytest.mark.parametrize("kind", ["uniform", "beta-binomial"])
    @pytest.mark.parametrize("p", [1, 3, 7, 12])
    def test_sums_to_one(self, kind, p):
        mp = ModelPrior(kind, p)
        total = sum(
            np.exp(log_model_prior(mp, np.array(bits)))
            for bits in itertools.product([0, 1], repeat=p)
        )
        assert total == pytest.approx(1.0, abs=1e-12)


class TestGPrior:
    def _w0(self, fam, y, n):
        fit = irls_fit(fam, y, np.ones((n, 1)))
        return fam.variance_fn(np.full(n, fit.beta_hat[0]))

    def test_gaussian_single_covariate_value(self):
        # Sum x^2 = 10, g = 10 -> standard normal at 0.
        x = np.sqrt(10 / 4) * np.array([1.0, -1.0, 1.0, -1.0])
        X = np.column_stack([np.ones(4), x])
        w0 = np.ones(4)
        got = log_gprior_density(GPriorConfig("unit-info-g"), gaussian(), X,
                                 np.array([0.3, 0.0]), 10.0, w0)
        assert got == pytest.approx(-0.9189385, abs=1e-6)

    def test_zero_coefficients_give_log_normalizer(self):
        rng = np.random.default_rng(3)
        X = np.column_stack([np.ones(12), rng.standard_normal((12, 2))])
        w0 = np.full(12, 0.21)
        M = (X[:, 1:] * w0[:, None]).T @ X[:, 1:]
        g = 9.0
        expected = float(
            -np.log(2 * np.pi) - np.log(g) + 0.5 * np.linalg.slogdet(M)[1]
        )
        got = log_gprior_density(GPriorConfig("unit-info-g"), gaussian(), X,
                                 np.array([1.7, 0.0, 0.0]), g, w0)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_matches_scipy_mvn(self):
        rng = np.random.default_rng(4)
        n, g = 20, 20.0
        x = rng.standard_normal(n)
        x -= x.mean()
        y = np.repeat([0.0, 1.0], 10)
        fam = binomial()
        w0 = self._w0(fam, y, n)
        X = np.column_stack([np.ones(n), x])
        M = (X[:, 1:] * w0[:, None]).T @ X[:, 1:]
        cov = g * np.linalg.inv(M)
        for b1 in (0.5, -1.2, 0.0):
            got = log_gprior_density(GPriorConfig("unit-info-g"), fam, X,
                                     np.array([0.4, b1]), g, w0)
            ref = multivariate_normal(mean=[0.0], cov=cov).logpdf([b1])
            assert got == pytest.approx(float(ref), rel=1e-10)

    def test_proper_density_2d(self):
        rng = np.random.default_rng(5)
        n = 15
        Xt = rng.standard_normal((n, 2))
        Xt -= Xt.mean(axis=0)
        X = np.column_stack([np.ones(n), Xt])
        w0 = np.full(n, 0.25)
        g = 5.0
        grid = np.linspace(-60, 60, 601)
        h = grid[1] - grid[0]
        B1, B2 = np.meshgrid(grid, grid, indexing="ij")
        vals = np.empty_like(B1)
        M = (Xt * w0[:, None]).T @ Xt
        logdet = np.linalg.slogdet(M)[1]
        quad_form = (
            M[0, 0] * B1 ** 2 + 2 * M[0, 1] * B1 * B2 + M[1, 1] * B2 ** 2
        ) / g
        vals = np.exp(-np.log(2 * np.pi) - np.log(g) + 0.5 * logdet - 0.5 * quad_form)
        total = vals.sum() * h * h
        assert total == pytest.approx(1.0, abs=1e-3)

    def test_hyper_g_normalizations(self):
        for cfg, d in [
            (GPriorConfig("hyper-g", a=3.0), 3),
            (GPriorConfig("hyper-g-n", a=3.0), 2),
            (GPriorConfig("mg-hyper-g"), 4),
        ]:
            val, _ = quad(
                lambda g: np.exp(log_g_hyperprior(cfg, g, 100, d)),
                0, np.inf, limit=400,
            )
            assert val == pytest.approx(1.0, abs=1e-5)
