"""Brute-force posterior model probabilities for tiny model spaces.

These oracles compute each model's marginal likelihood by direct
integration (never through the sampler's Laplace machinery) and are
used to validate the GVS chains on p <= 2 fixtures:

* binomial, single-trial responses: exhaustive summation over all
  imaginary-response vectors combined with Gauss-Hermite tensor
  quadrature over the coefficients;
* Gaussian with known unit variance: exact joint Gaussian integration
  over (beta, beta0, y*);
* the g-prior comparators: exact Gaussian algebra or coefficient-space
  quadrature, with a grid over g for the hyper modes.

Imaginary-response states for which a required prior-predictive
marginal diverges under the flat baseline (degenerate or separated
configurations, where the MLE does not exist) are dropped: the
symmetric-box limit of the defining integrals sends their contribution
to zero, matching the existence conditions of the prior.
"""

from __future__ import annotations

import functools
import itertools
import math

import numpy as np
from scipy.special import logsumexp
from scipy.linalg import cholesky, solve_triangular

from .dataset import Dataset
from .exceptions import ConfigurationError, PepGlmError
from .families import GlmFamily, irls_fit
from .laplace import laplace_parts
from .priors import (
    BaselinePrior,
    DeltaPrior,
    GPriorConfig,
    ModelPrior,
    log_baseline_prior,
    log_delta_prior,
    log_g_hyperprior,
    log_model_prior,
)

__all__ = ["brute_force_model_posterior", "brute_force_gprior_posterior"]

_LOG_2PI = float(np.log(2.0 * np.pi))
_DIVERGED = float("inf")
# A nonexistent binomial MLE drives a ridgeless capped fit to a parking
# orbit near |beta| ~ 18 with a vanishing score; small-sample MLEs on
# standardized designs sit far below this.  Dropping a legitimate huge
# mode is harmless (its term is ~0); admitting a divergent one is not.
_MLE_BOUND = 12.0


# ---------------------------------------------------------------------------
# quadrature helpers
# ---------------------------------------------------------------------------


_SINH_RANGE = 6.0  # sinh(6) ~ 200 standardized units of tail coverage


@functools.lru_cache(maxsize=32)
def _sinh_grid(nodes: int, d: int):
    """Tensor Simpson grid under u = sinh(t), cached per (nodes, dim).

    The sinh substitution places exponentially graded abscissae out to
    ~200 standardized units, which handles the exponential (rather than
    Gaussian) tails of powered GLM likelihoods; Simpson weights give
    fourth-order accuracy in the node spacing.
    """
    if nodes % 2 == 0:
        nodes += 1
    t = np.linspace(-_SINH_RANGE, _SINH_RANGE, nodes)
    h = t[1] - t[0]
    x = np.sinh(t)
    simpson = np.full(nodes, 2.0)
    simpson[1::2] = 4.0
    simpson[0] = simpson[-1] = 1.0
    logw_1d = np.log(simpson * h / 3.0) + np.log(np.cosh(t))
    idx = np.meshgrid(*([np.arange(nodes)] * d), indexing="ij")
    U = np.column_stack([x[ix.ravel()] for ix in idx])
    logw = np.zeros(U.shape[0])
    for ix in idx:
        logw += logw_1d[ix.ravel()]
    return U, logw


def _gh_log_integral(log_f, mode, info, nodes):
    """log of int exp(log_f(B)) dB on a mode-standardized sinh grid.

    ``log_f`` maps an (m, d) array of points to a length-m vector;
    ``info`` (the negative Hessian at the mode) sets the scale of the
    standardizing linear map.
    """
    d = mode.shape[0]
    U, logw = _sinh_grid(nodes, d)
    L = cholesky(info, lower=True)
    L_inv = solve_triangular(L, np.eye(d), lower=True)
    points = mode[None, :] + U @ L_inv
    log_jac = -float(np.sum(np.log(np.diag(L))))
    vals = log_f(points)
    return float(logsumexp(logw + vals) + log_jac)


def _newton_mode(log_f_grad_hess, start, iters=100):
    """Maximize a smooth concave function; returns (mode, negative Hessian)."""
    b = np.asarray(start, dtype=float).copy()
    f, g, H = log_f_grad_hess(b)
    for _ in range(iters):
        if np.max(np.abs(g)) < 1e-10:
            break
        step = np.linalg.solve(H, g)
        nb, fn, gn, Hn = b, f, g, H
        for _ in range(40):
            nb = b + step
            fn, gn, Hn = log_f_grad_hess(nb)
            if np.isfinite(fn) and fn >= f - 1e-12:
                break
            step = 0.5 * step
        b, f, g, H = nb, fn, gn, Hn
    return b, H


# ---------------------------------------------------------------------------
# binomial branch (single-trial responses, exhaustive y* summation)
# ---------------------------------------------------------------------------


class _LogisticPieces:
    """Quadrature pieces for one model on a fixed binary-response design."""

    def __init__(self, X, baseline: BaselinePrior, nodes: int):
        self.X = X
        self.baseline = baseline
        self.nodes = nodes
        self.n, self.d = X.shape

    def _log_integrand(self, points, suff, power):
        # log prod_i pi_i^{y_i} (1-pi_i)^{1-y_i} raised to `power`,
        # evaluated through the sufficient statistic X'y*.
        eta = points @ self.X.T
        base = points @ suff - np.logaddexp(0.0, eta).sum(axis=1)
        out = power * base
        if self.baseline.kind == "jeffreys":
            pi = 1.0 / (1.0 + np.exp(-eta))
            w = pi * (1.0 - pi)
            for_each = np.empty(points.shape[0])
            for i in range(points.shape[0]):
                s, ld = np.linalg.slogdet((self.X * w[i][:, None]).T @ self.X)
                for_each[i] = 0.5 * ld if s > 0 else -np.inf
            out = out + for_each
        return out

    def _mode_info(self, y, power, extra_y=None, extra_power=None):
        fam = GlmFamily("binomial")
        if extra_y is None:
            fit = irls_fit(fam, y, self.X, obs_weights=power, ridge=0.0, max_iter=200)
            if not fit.converged or np.max(np.abs(fit.beta_hat)) > _MLE_BOUND:
                return None
            return fit.beta_hat, fit.observed_info
        y_all = np.concatenate([y, extra_y])
        X_all = np.vstack([self.X, self.X])
        w_all = np.concatenate(
            [np.full(self.n, power), np.full(self.n, extra_power)]
        )
        fit = irls_fit(fam, y_all, X_all, obs_weights=w_all, ridge=0.0, max_iter=200)
        if not fit.converged or np.max(np.abs(fit.beta_hat)) > _MLE_BOUND:
            return None
        return fit.beta_hat, fit.observed_info

    def log_powered_marginal(self, y_star, delta):
        """log int f(y* | b)^(1/delta) pi_N(b) db; +inf when it diverges."""
        mi = self._mode_info(y_star, 1.0 / delta)
        if mi is None:
            if self.baseline.kind == "flat":
                return _DIVERGED
            # Jeffreys keeps the integral finite; standardize around a
            # ridged mode instead of the nonexistent MLE.
            fam = GlmFamily("binomial")
            fit = irls_fit(fam, y_star, self.X, obs_weights=1.0 / delta,
                           ridge=1e-4, max_iter=200)
            mi = (fit.beta_hat, fit.observed_info + 1e-4 * np.eye(self.d))
        mode, info = mi
        suff = self.X.T @ y_star

        def log_f(points):
            return self._log_integrand(points, suff, 1.0 / delta)

        return _gh_log_integral(log_f, mode, info, self.nodes)

    def log_joint_marginal(self, y, y_star, delta):
        """log int f(y | b) f(y* | b)^(1/delta) pi_N(b) db."""
        mi = self._mode_info(y, 1.0, extra_y=y_star, extra_power=1.0 / delta)
        if mi is None:
            fam = GlmFamily("binomial")
            y_all = np.concatenate([y, y_star])
            X_all = np.vstack([self.X, self.X])
            w_all = np.concatenate(
                [np.ones(self.n), np.full(self.n, 1.0 / delta)]
            )
            fit = irls_fit(fam, y_all, X_all, obs_weights=w_all, ridge=1e-4,
                           max_iter=200)
            mi = (fit.beta_hat, fit.observed_info + 1e-4 * np.eye(self.d))
        mode, info = mi
        suff = self.X.T @ y
        suff_star = self.X.T @ y_star

        def log_f(points):
            return (
                self._log_integrand(points, suff, 1.0)
                + self._log_integrand(points, suff_star, 1.0 / delta)
                - (0.0 if self.baseline.kind == "flat"
                   else self._log_integrand(points, np.zeros(self.d), 0.0))
            )

        return _gh_log_integral(log_f, mode, info, self.nodes)


def _binomial_log_marginals(dataset, masks, reference, baseline, delta, nodes,
                            inner_marginal="exact", ridge=1e-6):
    n = dataset.n
    if n > 12:
        raise ConfigurationError("exhaustive imaginary-data summation needs n <= 12")
    if dataset.trials is not None and np.any(dataset.trials != 1):
        raise ConfigurationError("exhaustive summation supports single-trial data only")
    psi = 1.0 if reference == "cr" else delta
    fam = GlmFamily("binomial")

    null_pieces = _LogisticPieces(np.ones((n, 1)), baseline, 513)
    model_pieces = {
        mask: _LogisticPieces(dataset.design_for(np.asarray(mask, dtype=bool)),
                              baseline, nodes)
        for mask in masks
    }

    # Reference-model weights depend on y* only through its sum; the
    # intercept MLE does not exist at s in {0, n} (flat baseline).
    log_ref = {}
    for s in range(n + 1):
        if baseline.kind == "flat" and s in (0, n):
            log_ref[s] = _DIVERGED
            continue
        y_star = np.concatenate([np.ones(s), np.zeros(n - s)])
        log_ref[s] = null_pieces.log_powered_marginal(y_star, psi)

    out = {}
    for mask, pieces in model_pieces.items():
        cache_m, cache_inner = {}, {}
        terms = []
        for bits in itertools.product((0.0, 1.0), repeat=n):
            y_star = np.asarray(bits)
            s = int(y_star.sum())
            if not np.isfinite(log_ref[s]) and baseline.kind == "flat":
                continue
            key = (pieces.X.T @ y_star).tobytes()
            if key not in cache_m:
                if inner_marginal == "laplace":
                    # The sampler's own ridge-stabilized Laplace value:
                    # this mode integrates exactly the chain's target.
                    parts = laplace_parts(fam, baseline, y_star, pieces.X,
                                          ridge=ridge)
                    cache_m[key] = parts.assemble(delta)
                else:
                    cache_m[key] = pieces.log_powered_marginal(y_star, delta)
            log_m = cache_m[key]
            if log_m == _DIVERGED:
                continue
            if key not in cache_inner:
                cache_inner[key] = pieces.log_joint_marginal(dataset.y, y_star, delta)
            terms.append(log_ref[s] - log_m + cache_inner[key])
        if not terms:
            raise PepGlmError("all imaginary-data terms diverged")
        out[mask] = float(logsumexp(np.asarray(terms)))
    return out


# ---------------------------------------------------------------------------
# Gaussian branch (exact joint Gaussian integration)
# ---------------------------------------------------------------------------


def _gaussian_log_marginal(dataset, mask, reference, delta):
    """Exact log marginal of one model under the PEP prior, unit variance.

    Integrates exp of the quadratic exponent in z = (beta, beta0, y*)
    formed by the observed likelihood, the powered imaginary likelihood,
    the powered reference likelihood, and the inverse powered marginal,
    all with flat baselines (Jeffreys differs by a constant that cancels
    between the numerator and the inverse marginal for this family).
    """
    X = dataset.design_for(np.asarray(mask, dtype=bool))
    y = dataset.y
    n, d = X.shape
    psi = 1.0 if reference == "cr" else delta
    xtx = X.T @ X
    sign, logdet_xtx = np.linalg.slogdet(xtx)
    if sign <= 0:
        raise PepGlmError("rank-deficient design")
    proj = X @ np.linalg.solve(xtx, X.T)

    m = d + 1 + n
    A = np.zeros((m, m))
    A[:d, :d] = xtx * (1.0 + 1.0 / delta)
    A[d, d] = n / psi
    A[d + 1 :, d + 1 :] = proj / delta + np.eye(n) / psi
    A[:d, d + 1 :] = -X.T / delta
    A[d + 1 :, :d] = -X / delta
    A[d, d + 1 :] = -np.ones(n) / psi
    A[d + 1 :, d] = -np.ones(n) / psi
    b = np.zeros(m)
    b[:d] = X.T @ y

    sign_a, logdet_a = np.linalg.slogdet(A)
    if sign_a <= 0:
        raise PepGlmError("joint exponent is not positive definite")
    quad = float(b @ np.linalg.solve(A, b))
    const = (
        -0.5 * n * _LOG_2PI
        - 0.5 * n * _LOG_2PI / psi
        - 0.5 * d * (_LOG_2PI + np.log(delta))
        + 0.5 * logdet_xtx
        - 0.5 * float(y @ y)
    )
    return const + 0.5 * m * _LOG_2PI - 0.5 * logdet_a + 0.5 * quad


# ---------------------------------------------------------------------------
# public oracles
# ---------------------------------------------------------------------------


def _delta_grid(dp: DeltaPrior, n_nodes: int = 96):
    """Gauss-Legendre nodes/log-weights on delta via t = delta/(1+delta)."""
    t, w = np.polynomial.legendre.leggauss(n_nodes)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    delta = t / (1.0 - t)
    log_w = np.log(w) - 2.0 * np.log1p(-t)
    log_prior = np.array([log_delta_prior(dp, dk) for dk in delta])
    return delta, log_w + log_prior


def brute_force_model_posterior(
    dataset: Dataset,
    family: GlmFamily,
    reference: str = "cr",
    baseline: BaselinePrior = BaselinePrior("flat"),
    model_prior: ModelPrior | None = None,
    delta: float | None = None,
    delta_prior: DeltaPrior | None = None,
    nodes: int = 97,
    inner_marginal: str = "exact",
) -> dict:
    """Posterior probability of each of the 2^p models, p <= 2.

    ``delta`` fixes the power parameter; alternatively ``delta_prior``
    integrates it out on a shrinkage-transformed grid.

    ``inner_marginal`` selects what stands in for the powered
    prior-predictive inside the definition: ``"exact"`` (quadrature;
    the mathematically exact posterior) or ``"laplace"`` (the sampler's
    ridge-stabilized approximation, so the result is the exact marginal
    of the chain's own target; for the Gaussian family the two
    coincide).
    """
    if inner_marginal not in ("exact", "laplace"):
        raise ConfigurationError("inner_marginal must be 'exact' or 'laplace'")
    if dataset.p > 2:
        raise ConfigurationError("the brute-force oracle supports p <= 2 only")
    if (delta is None) == (delta_prior is None):
        raise ConfigurationError("give exactly one of delta or delta_prior")
    mp = model_prior or ModelPrior("uniform", dataset.p)
    masks = [tuple(bits) for bits in itertools.product((0, 1), repeat=dataset.p)]

    def marginals_at(dk):
        if family.kind == "binomial":
            return _binomial_log_marginals(dataset, masks, reference, baseline,
                                           dk, nodes, inner_marginal)
        if family.kind == "gaussian":
            return {mask: _gaussian_log_marginal(dataset, mask, reference, dk)
                    for mask in masks}
        raise ConfigurationError(f"no brute-force oracle for family {family.kind!r}")

    if delta is not None:
        log_m = marginals_at(float(delta))
    else:
        grid, log_wts = _delta_grid(delta_prior)
        per_model = {mask: [] for mask in masks}
        for dk, lw in zip(grid, log_wts):
            mk = marginals_at(float(dk))
            for mask in masks:
                per_model[mask].append(lw + mk[mask])
        log_m = {mask: float(logsumexp(np.asarray(v))) for mask, v in per_model.items()}

    log_post = np.array(
        [log_m[mask] + log_model_prior(mp, np.asarray(mask)) for mask in masks]
    )
    log_post -= logsumexp(log_post)
    return {mask: float(np.exp(lp)) for mask, lp in zip(masks, log_post)}


# ---------------------------------------------------------------------------
# g-prior oracle
# ---------------------------------------------------------------------------


def _gprior_gaussian_log_marginal(dataset, mask, g, w0):
    X = dataset.design_for(np.asarray(mask, dtype=bool))
    y = dataset.y
    n, d = X.shape
    k = d - 1
    if k == 0:
        # Flat intercept only: int N(y; b0 1, I) db0.
        resid = y - y.mean()
        return float(
            -0.5 * n * _LOG_2PI - 0.5 * resid @ resid
            + 0.5 * np.log(2.0 * np.pi / n)
        )
    Xt = X[:, 1:]
    M = (Xt * np.asarray(w0)[:, None]).T @ Xt
    A = np.zeros((d, d))
    A[0, 0] = n
    A[1:, 1:] = Xt.T @ Xt + M / g
    A[0, 1:] = Xt.sum(axis=0)
    A[1:, 0] = Xt.sum(axis=0)
    b = X.T @ y
    sign_m, logdet_m = np.linalg.slogdet(M)
    sign_a, logdet_a = np.linalg.slogdet(A)
    if sign_m <= 0 or sign_a <= 0:
        raise PepGlmError("singular g-prior system")
    quad = float(b @ np.linalg.solve(A, b))
    return float(
        -0.5 * n * _LOG_2PI - 0.5 * float(y @ y)
        - 0.5 * k * (_LOG_2PI + np.log(g)) + 0.5 * logdet_m
        + 0.5 * d * _LOG_2PI - 0.5 * logdet_a + 0.5 * quad
    )


def _gprior_logistic_log_marginal(dataset, mask, g, w0, nodes):
    X = dataset.design_for(np.asarray(mask, dtype=bool))
    y = dataset.y
    n, d = X.shape
    fam = GlmFamily("binomial")
    if d > 1:
        Xt = X[:, 1:]
        M = (Xt * np.asarray(w0)[:, None]).T @ Xt
        sign_m, logdet_m = np.linalg.slogdet(M)
        if sign_m <= 0:
            raise PepGlmError("singular g-prior covariance")
        prior_const = -0.5 * (d - 1) * (_LOG_2PI + np.log(g)) + 0.5 * logdet_m
    else:
        M = np.zeros((0, 0))
        prior_const = 0.0

    def fgh(beta):
        eta = X @ beta
        pi = 1.0 / (1.0 + np.exp(-eta))
        ll = float(y @ eta - np.logaddexp(0.0, eta).sum())
        grad = X.T @ (y - pi)
        H = (X * (pi * (1 - pi))[:, None]).T @ X
        if d > 1:
            ll -= 0.5 * float(beta[1:] @ M @ beta[1:]) / g
            grad = grad - np.concatenate(([0.0], M @ beta[1:] / g))
            H = H + np.block(
                [[np.zeros((1, 1)), np.zeros((1, d - 1))],
                 [np.zeros((d - 1, 1)), M / g]]
            )
        return ll, grad, H

    mode, info = _newton_mode(fgh, np.zeros(d))

    def log_f(points):
        eta = points @ X.T
        ll = points @ (X.T @ y) - np.logaddexp(0.0, eta).sum(axis=1)
        if d > 1:
            bt = points[:, 1:]
            ll = ll - 0.5 * np.einsum("ij,jk,ik->i", bt, M, bt) / g
        return ll

    return prior_const + _gh_log_integral(log_f, mode, info, nodes)


def brute_force_gprior_posterior(
    dataset: Dataset,
    family: GlmFamily,
    gprior: GPriorConfig,
    model_prior: ModelPrior | None = None,
    nodes: int | None = None,
) -> dict:
    """Posterior model probabilities under the g-prior family, p <= 2."""
    if dataset.p > 2:
        raise ConfigurationError("the brute-force oracle supports p <= 2 only")
    mp = model_prior or ModelPrior("uniform", dataset.p)
    masks = [tuple(bits) for bits in itertools.product((0, 1), repeat=dataset.p)]

    fam = family.with_trials(dataset.trials)
    null = irls_fit(fam, dataset.y, np.ones((dataset.n, 1)), ridge=1e-8)
    w0 = fam.variance_fn(np.full(dataset.n, null.beta_hat[0]))

    def marginal(mask, g):
        if family.kind == "gaussian":
            return _gprior_gaussian_log_marginal(dataset, mask, g, w0)
        if family.kind == "binomial":
            per_dim = nodes if nodes is not None else (97 if sum(mask) < 2 else 61)
            return _gprior_logistic_log_marginal(dataset, mask, g, w0, per_dim)
        raise ConfigurationError(f"no g-prior oracle for family {family.kind!r}")

    if gprior.kind == "unit-info-g":
        g = float(gprior.g) if gprior.g is not None else float(dataset.n)
        log_m = {mask: marginal(mask, g) for mask in masks}
    else:
        t, w = np.polynomial.legendre.leggauss(96)
        t = 0.5 * (t + 1.0)
        w = 0.5 * w
        grid = t / (1.0 - t)
        base_logw = np.log(w) - 2.0 * np.log1p(-t)
        log_m = {}
        for mask in masks:
            d_gamma = int(sum(mask)) + 1
            vals = [
                base_logw[i]
                + log_g_hyperprior(gprior, gk, dataset.n, d_gamma)
                + marginal(mask, gk)
                for i, gk in enumerate(grid)
            ]
            log_m[mask] = float(logsumexp(np.asarray(vals)))

    log_post = np.array(
        [log_m[mask] + log_model_prior(mp, np.asarray(mask)) for mask in masks]
    )
    log_post -= logsumexp(log_post)
    return {mask: float(np.exp(lp)) for mask, lp in zip(masks, log_post)}
