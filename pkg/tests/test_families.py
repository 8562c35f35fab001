"""Tests of the GLM substrate: likelihoods, scores, information, IRLS."""

import numpy as np
import pytest
from scipy.optimize import minimize

from pepglm.exceptions import (
    DataValidationError,
    NumericalRangeError,
    SingularSystemError,
)
from pepglm.families import (
    GlmFamily,
    binomial,
    gaussian,
    irls_fit,
    log_likelihood,
    observed_information,
    poisson,
    score,
)


def _random_case(rng):
    kind = rng.choice(["binomial", "poisson", "gaussian"])
    n = int(rng.integers(5, 40))
    d = int(rng.integers(1, 4))
    X = np.column_stack([np.ones(n), rng.standard_normal((n, d - 1))]) if d > 1 \
        else np.ones((n, 1))
    beta = rng.normal(scale=0.7, size=d)
    eta = X @ beta
    if kind == "binomial":
        trials = rng.integers(1, 4, size=n).astype(float)
        fam = GlmFamily("binomial", trials=trials)
        y = rng.binomial(trials.astype(int), 1 / (1 + np.exp(-eta))).astype(float)
    elif kind == "poisson":
        fam = poisson()
        y = rng.poisson(np.exp(eta)).astype(float)
    else:
        fam = gaussian()
        y = eta + rng.standard_normal(n)
    w = rng.uniform(0.2, 2.0, size=n)
    return fam, y, X, beta, w


class TestLogLikelihood:
    def test_logistic_at_zero(self):
        X = np.ones((4, 1))
        y = np.array([1.0, 0.0, 1.0, 0.0])
        ll = log_likelihood(binomial(), y, X, np.zeros(1))
        assert ll == pytest.approx(4 * np.log(0.5), abs=1e-12)

    def test_poisson_unit_rate(self):
        X = np.ones((2, 1))
        ll = log_likelihood(poisson(), np.array([1.0, 1.0]), X, np.zeros(1))
        assert ll == pytest.approx(-2.0, abs=1e-12)

    def test_half_weights_halve_value(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            fam, y, X, beta, _ = _random_case(rng)
            full = log_likelihood(fam, y, X, beta)
            half = log_likelihood(fam, y, X, beta, obs_weights=0.5)
            assert half == pytest.approx(0.5 * full, rel=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DataValidationError):
            log_likelihood(gaussian(), np.zeros(3), np.ones((3, 1)), np.zeros(2))

    def test_invalid_binomial_response(self):
        with pytest.raises(DataValidationError):
            log_likelihood(binomial(), np.array([2.0]), np.ones((1, 1)), np.zeros(1))

    def test_nonfinite_predictor(self):
        with pytest.raises(NumericalRangeError):
            log_likelihood(gaussian(), np.zeros(2), np.ones((2, 1)),
                           np.array([np.inf]))

    def test_nonpositive_weights_rejected(self):
        with pytest.raises(DataValidationError):
            log_likelihood(gaussian(), np.zeros(2), np.ones((2, 1)),
                           np.zeros(1), obs_weights=0.0)


class TestDerivatives:
    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        h = 1e-6
        for _ in range(100):
            fam, y, X, beta, w = _random_case(rng)
            g = score(fam, y, X, beta, w)
            num = np.empty_like(g)
            for j in range(beta.size):
                e = np.zeros_like(beta)
                e[j] = h
                num[j] = (
                    log_likelihood(fam, y, X, beta + e, w)
                    - log_likelihood(fam, y, X, beta - e, w)
                ) / (2 * h)
            scale = np.maximum(np.abs(g), 1.0)
            assert np.max(np.abs(g - num) / scale) < 1e-5

    def test_hessian_matches_observed_information(self):
        rng = np.random.default_rng(13)
        h = 1e-5
        for _ in range(60):
            fam, y, X, beta, w = _random_case(rng)
            info = observed_information(fam, X, beta, w)
            d = beta.size
            num = np.empty((d, d))
            for j in range(d):
                e = np.zeros(d)
                e[j] = h
                num[:, j] = -(
                    score(fam, y, X, beta + e, w) - score(fam, y, X, beta - e, w)
                ) / (2 * h)
            scale = np.maximum(np.abs(info), 1.0)
            assert np.max(np.abs(info - num) / scale) < 1e-4


class TestObservedInformation:
    def test_gaussian_is_xtx(self):
        rng = np.random.default_rng(5)
        X = np.column_stack([np.ones(8), rng.standard_normal(8)])
        for beta in (np.zeros(2), np.array([3.0, -2.0])):
            np.testing.assert_allclose(
                observed_information(gaussian(), X, beta), X.T @ X
            )

    def test_logistic_at_zero_is_quarter_xtx(self):
        rng = np.random.default_rng(6)
        X = np.column_stack([np.ones(9), rng.standard_normal(9)])
        np.testing.assert_allclose(
            observed_information(binomial(), X, np.zeros(2)), 0.25 * X.T @ X
        )

    def test_poisson_null_at_zero(self):
        X = np.ones((3, 1))
        np.testing.assert_allclose(
            observed_information(poisson(), X, np.zeros(1)), [[3.0]]
        )


class TestIrlsFit:
    def test_gaussian_equals_ols(self):
        rng = np.random.default_rng(2)
        X = np.column_stack([np.ones(20), rng.standard_normal((20, 2))])
        y = X @ np.array([1.0, 2.0, -1.0]) + rng.standard_normal(20)
        fit = irls_fit(gaussian(), y, X)
        ols = np.linalg.solve(X.T @ X, X.T @ y)
        np.testing.assert_allclose(fit.beta_hat, ols, atol=1e-10)
        np.testing.assert_allclose(fit.observed_info, X.T @ X)
        assert fit.converged

    def test_gaussian_one_iteration_any_start(self):
        rng = np.random.default_rng(4)
        X = np.column_stack([np.ones(15), rng.standard_normal(15)])
        y = rng.standard_normal(15)
        for start in (np.zeros(2), np.array([100.0, -50.0]), rng.normal(size=2)):
            fit = irls_fit(gaussian(), y, X, start=start)
            assert fit.converged and fit.iterations == 1

    def test_logistic_intercept_only(self):
        y = np.array([1.0, 0.0, 1.0, 0.0])
        fit = irls_fit(binomial(), y, np.ones((4, 1)))
        assert fit.converged
        assert fit.beta_hat[0] == pytest.approx(0.0, abs=1e-8)

    def test_complete_separation_with_ridge(self):
        # Ridge-stabilized mode stays finite; cross-check against a
        # penalized-likelihood optimizer.
        y = np.array([0.0, 0.0, 1.0, 1.0])
        X = np.column_stack([np.ones(4), np.array([-1.0, -1.0, 1.0, 1.0])])
        ridge = 1e-6
        fit = irls_fit(binomial(), y, X, ridge=ridge)
        assert np.all(np.isfinite(fit.beta_hat))

        def neg_penalized(beta):
            return -(log_likelihood(binomial(), y, X, beta)
                     - 0.5 * ridge * beta @ beta)

        opt = minimize(neg_penalized, np.zeros(2), method="BFGS",
                       options={"gtol": 1e-10, "maxiter": 500})
        if fit.converged:
            np.testing.assert_allclose(fit.beta_hat, opt.x, atol=1e-3)

    def test_rank_deficient_without_ridge(self):
        X = np.column_stack([np.ones(6), np.ones(6)])
        y = np.arange(6.0)
        with pytest.raises(SingularSystemError):
            irls_fit(gaussian(), y, X, ridge=0.0)

    def test_powered_weights_same_mode_scaled_info(self):
        # Only meaningful where the MLE exists (skip separated draws).
        rng = np.random.default_rng(9)
        checked = 0
        while checked < 10:
            fam, y, X, _, _ = _random_case(rng)
            delta = float(rng.uniform(1.0, 30.0))
            plain = irls_fit(fam, y, X)
            if not plain.converged or np.max(np.abs(plain.beta_hat)) > 15:
                continue
            powered = irls_fit(fam, y, X, obs_weights=1.0 / delta)
            np.testing.assert_allclose(powered.beta_hat, plain.beta_hat, atol=1e-6)
            np.testing.assert_allclose(
                powered.observed_info, plain.observed_info / delta, rtol=1e-6
            )
            checked += 1

    def test_observed_info_psd_at_convergence(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            fam, y, X, _, _ = _random_case(rng)
            fit = irls_fit(fam, y, X, ridge=1e-6)
            vals = np.linalg.eigvalsh(fit.observed_info)
            assert np.all(vals > -1e-10)


class TestFamilyInvariants:
    def test_variance_function_positive(self):
        rng = np.random.default_rng(17)
        eta = rng.uniform(-8, 8, size=200)
        for fam in (binomial(), poisson(), gaussian()):
            assert np.all(fam.variance_fn(eta) > 0)

    def test_link_roundtrip(self):
        rng = np.random.default_rng(19)
        eta = rng.uniform(-4, 4, size=50)
        for fam in (binomial(), poisson(), gaussian()):
            mu = fam.mean(eta)
            np.testing.assert_allclose(fam.mean(fam.link(mu)), mu, rtol=1e-10)

    def test_gaussian_variance_fixed(self):
        with pytest.raises(DataValidationError):
            GlmFamily("gaussian", variance=2.0)
