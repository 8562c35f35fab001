"""Gibbs variable selection samplers.

Two chains share the same skeleton:

* ``PepGvs`` samples the augmented posterior over
  (gamma, beta_active, beta_inactive, beta0, y*, delta) in which the
  powered prior-predictive of each model is replaced by its Laplace
  approximation.  One iteration runs, in order: the systematic
  gamma-sweep, the active-coefficient Metropolis-Hastings move, the
  pseudo-prior refresh of inactive coefficients, the reference-model
  intercept move, the imaginary-data block move, and (when delta is
  random) the power-parameter random walk.

* ``GPriorGvs`` is the analogous chain for the g-prior comparator
  family over (gamma, beta, g): no imaginary data and no marginal
  term; the coefficient prior is the GLM g-prior with a flat intercept.

Both are deterministic given the seed.  Moves whose supporting fit
fails, or whose odds/acceptance ratio is non-finite, leave the state
unchanged and increment a diagnostics counter; a chain never aborts on
a single rejected move.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.special import expit, gammaln

from .dataset import Dataset
from .exceptions import ConfigurationError, PepGlmError
from .families import GlmFamily, irls_fit, log_likelihood
from .laplace import LaplaceParts, laplace_parts
from .priors import (
    BaselinePrior,
    DeltaPrior,
    GPriorConfig,
    ModelPrior,
    log_baseline_prior,
    log_delta_prior,
    log_gprior_density,
    log_g_hyperprior,
    log_model_prior,
)

logger = logging.getLogger(__name__)

__all__ = [
    "SamplerConfig",
    "SamplerState",
    "PseudoPrior",
    "ChainOutput",
    "PepGvs",
    "GPriorGvs",
    "init_state",
    "run_chain",
    "run_gprior_chain",
]

_LOG_2PI = float(np.log(2.0 * np.pi))
SAMPLER_RIDGE = 1e-6


@dataclass(frozen=True)
class SamplerConfig:
    """Run-time configuration of the PEP-GVS chain.

    ``reference_mode="cr"`` fixes the reference exponent at 1;
    ``"dr"`` ties it to the current delta.  The delta random-walk
    variance follows the rule s^2 = current delta.
    """

    family: GlmFamily
    iterations: int = 41000
    burn_in: int = 1000
    seed: int = 0
    reference_mode: str = "cr"
    delta_prior: DeltaPrior = field(default_factory=DeltaPrior)
    baseline: BaselinePrior = field(default_factory=BaselinePrior)
    model_prior: ModelPrior | None = None
    ridge: float | None = None
    fixed_gamma: np.ndarray | None = None
    record_beta: bool = False

    def __post_init__(self):
        if self.reference_mode not in ("cr", "dr"):
            raise ConfigurationError(f"unknown reference mode: {self.reference_mode!r}")
        if not 0 <= self.burn_in < self.iterations:
            raise ConfigurationError("burn-in must be smaller than the iteration count")

    def resolved_ridge(self) -> float:
        # Gaussian log-likelihoods are exactly quadratic, so the
        # unpenalized fit is exact and keeps the conjugate moves exact.
        if self.ridge is not None:
            return self.ridge
        return 0.0 if self.family.kind == "gaussian" else SAMPLER_RIDGE


@dataclass
class SamplerState:
    """Augmented-posterior coordinates of one chain."""

    gamma: np.ndarray
    beta: np.ndarray
    beta0: float
    y_star: np.ndarray
    delta: float

    def copy(self) -> "SamplerState":
        return SamplerState(
            gamma=self.gamma.copy(),
            beta=self.beta.copy(),
            beta0=self.beta0,
            y_star=self.y_star.copy(),
            delta=self.delta,
        )


@dataclass
class PseudoPrior:
    """Independent normals at the full-model ML estimates.

    Computed once from the observed data; used both to refresh
    inactive coefficients and in the gamma-sweep odds.
    """

    means: np.ndarray
    sds: np.ndarray

    def logpdf(self, idx: np.ndarray, values: np.ndarray) -> float:
        if idx.size == 0:
            return 0.0
        z = (values - self.means[idx]) / self.sds[idx]
        return float(-0.5 * np.sum(z * z) - np.sum(np.log(self.sds[idx]))
                     - 0.5 * idx.size * _LOG_2PI)

    def draw(self, idx: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        return self.means[idx] + self.sds[idx] * rng.standard_normal(idx.size)


@dataclass
class ChainOutput:
    """Recorded post-burn-in draws and bookkeeping of one chain."""

    gamma_draws: np.ndarray
    delta_draws: np.ndarray
    acceptance_rates: dict
    visited_models: dict
    diagnostics: dict
    config: object
    beta_draws: np.ndarray | None = None

    @property
    def n_draws(self) -> int:
        return self.gamma_draws.shape[0]

    def inclusion_probabilities(self) -> np.ndarray:
        return self.gamma_draws.mean(axis=0)


class _Counter:
    __slots__ = ("accepted", "proposed")

    def __init__(self):
        self.accepted = 0
        self.proposed = 0

    def rate(self) -> float:
        return self.accepted / self.proposed if self.proposed else float("nan")


def _mvn_draw(mean, chol_info_lower, rng):
    z = rng.standard_normal(mean.shape[0])
    return mean + solve_triangular(chol_info_lower.T, z, lower=False, check_finite=False)

def _mvn_logpdf_from_info(x, mean, chol_info_lower):
    r = x - mean
    u = chol_info_lower.T @ r
    logdet_info = 2.0 * float(np.sum(np.log(np.diag(chol_info_lower))))
    return float(-0.5 * u @ u + 0.5 * logdet_info - 0.5 * x.shape[0] * _LOG_2PI)


def _log_sigmoid(x):
    return -np.logaddexp(0.0, -x)


def _binom_logpmf(y, ntr, log_p, log_q):
    if ntr is None:  # single-trial: binomial coefficient is 1
        return float(np.sum(y * log_p + (1.0 - y) * log_q))
    return float(
        np.sum(y * log_p + (ntr - y) * log_q
               + gammaln(ntr + 1) - gammaln(y + 1) - gammaln(ntr - y + 1))
    )


def _poisson_logpmf(y, log_lam):
    lam = np.exp(log_lam)
    return float(np.sum(y * log_lam - lam - gammaln(y + 1)))


def _gamma_logpdf(x, shape, rate):
    if x <= 0:
        return -np.inf
    return float(shape * np.log(rate) - gammaln(shape)
                 + (shape - 1.0) * np.log(x) - rate * x)


class _LaplaceCache:
    """Per-chain cache of the delta-free Laplace pieces, keyed by model.

    Entries are valid for the current imaginary-data vector only; mode
    estimates survive invalidation as warm starts for the next fits.
    """

    def __init__(self, engine):
        self.engine = engine
        self.parts: dict[bytes, LaplaceParts] = {}
        self.warm: dict[bytes, np.ndarray] = {}

    def invalidate(self):
        self.parts.clear()

    def get(self, mask: np.ndarray) -> LaplaceParts:
        key = mask.tobytes()
        hit = self.parts.get(key)
        if hit is not None:
            return hit
        eng = self.engine
        parts = laplace_parts(
            eng.family,
            eng.config.baseline,
            eng.state.y_star,
            eng.dataset.design_for(mask),
            ridge=eng.ridge,
            start=self.warm.get(key),
        )
        self.parts[key] = parts
        self.warm[key] = parts.beta_hat
        return parts


class PepGvs:
    """PEP Gibbs-variable-selection chain for one dataset."""

    def __init__(self, config: SamplerConfig, dataset: Dataset):
        self.config = config
        self.dataset = dataset
        self.family = config.family.with_trials(dataset.trials)
        dataset.validate_for(config.family)
        self.ridge = config.resolved_ridge()
        self.p = dataset.p
        if config.model_prior is None:
            self.model_prior = ModelPrior("uniform", self.p)
        else:
            if config.model_prior.p != self.p:
                raise ConfigurationError("model prior dimension does not match the data")
            self.model_prior = config.model_prior
        self.rng = np.random.default_rng(config.seed)
        self.pseudo = self._build_pseudo_prior()
        self.state = init_state(config, dataset)
        self.cache = _LaplaceCache(self)
        self.counters = {k: _Counter() for k in ("beta", "beta0", "ystar", "delta")}
        self.events = {
            "gamma_retained_nonfinite": 0,
            "beta_fit_skipped": 0,
            "ystar_fit_rejected": 0,
            "nonfinite_ratios": 0,
            "ratio_evaluations": 0,
        }
        if config.fixed_gamma is not None:
            fixed = np.asarray(config.fixed_gamma, dtype=bool)
            if fixed.shape[0] != self.p:
                raise ConfigurationError("fixed gamma has the wrong length")
            self.state.gamma = fixed.copy()

    # -- configuration helpers -------------------------------------------

    @property
    def psi(self) -> float:
        return 1.0 if self.config.reference_mode == "cr" else self.state.delta

    def _psi_for(self, delta: float) -> float:
        return 1.0 if self.config.reference_mode == "cr" else delta

    def _build_pseudo_prior(self) -> PseudoPrior:
        ridge = max(self.ridge, SAMPLER_RIDGE)
        fit = irls_fit(self.family, self.dataset.y, self.dataset.X, ridge=ridge)
        cov = np.linalg.inv(fit.observed_info + ridge * np.eye(self.p + 1))
        return PseudoPrior(means=fit.beta_hat, sds=np.sqrt(np.diag(cov)))

    # -- likelihood pieces -------------------------------------------------

    def _active_cols(self, mask: np.ndarray) -> np.ndarray:
        return np.concatenate(([0], 1 + np.flatnonzero(mask)))

    def _loglik_pair(self, mask: np.ndarray, beta_full: np.ndarray):
        """Observed- and imaginary-data log-likelihoods of one model."""
        cols = self._active_cols(mask)
        Xg = self.dataset.X[:, cols]
        eta = Xg @ beta_full[cols]
        ll_obs = float(self.family.loglik_terms(self.dataset.y, eta).sum())
        ll_im = float(self.family.loglik_terms(self.state.y_star, eta).sum())
        return ll_obs, ll_im, Xg, beta_full[cols]

    def _null_mode(self, y: np.ndarray) -> tuple[float, float]:
        """Intercept-only ML estimate and information, closed form where
        the MLE exists; ridged IRLS fallback for degenerate responses."""
        kind = self.family.kind
        n = y.shape[0]
        if kind == "gaussian":
            return float(y.mean()), float(n)
        if kind == "binomial":
            ntr = self.dataset.trials
            total = float(n if ntr is None else ntr.sum())
            s = float(y.sum())
            if 0.0 < s < total:
                pi = s / total
                return float(np.log(pi) - np.log1p(-pi)), total * pi * (1.0 - pi)
        else:
            ybar = float(y.mean())
            if ybar > 0.0:
                return float(np.log(ybar)), n * ybar
        ones = np.ones((n, 1))
        fit = irls_fit(self.family, y, ones, ridge=max(self.ridge, SAMPLER_RIDGE),
                       start=np.array([self.state.beta0]))
        if not fit.converged:
            raise PepGlmError("null fit did not converge")
        return float(fit.beta_hat[0]), float(fit.observed_info[0, 0])

    def _loglik_null(self, y: np.ndarray, beta0: float) -> float:
        eta = np.full(y.shape[0], beta0)
        return float(self.family.loglik_terms(y, eta).sum())

    def _log_baseline_null(self, beta0: float) -> float:
        if self.config.baseline.kind == "flat":
            return 0.0
        ones = np.ones((self.dataset.n, 1))
        return log_baseline_prior(
            self.config.baseline, self.family, ones, np.array([beta0])
        )

    def set_state(self, state: SamplerState) -> None:
        """Replace the chain state, invalidating imaginary-data caches."""
        self.state = state.copy()
        self.cache.invalidate()

    # -- joint density (direct evaluation of the augmented target) --------

    def log_joint(self, state: SamplerState | None = None) -> float:
        """Log of the augmented posterior kernel at the given state.

        The marginal term uses the same cache as the gamma-sweep, so the
        state's imaginary data must match the engine's current state
        (use ``set_state`` first when evaluating a custom state).
        """
        s = state if state is not None else self.state
        mask = s.gamma
        ll_obs, ll_im, Xg, beta_g = self._loglik_pair(mask, s.beta)
        inactive = 1 + np.flatnonzero(~mask)
        parts = self.cache.get(mask)
        psi = self._psi_for(s.delta)
        total = (
            ll_obs
            + ll_im / s.delta
            + self._loglik_null(s.y_star, s.beta0) / psi
            - parts.assemble(s.delta)
            + log_baseline_prior(self.config.baseline, self.family, Xg, beta_g)
            + self.pseudo.logpdf(inactive, s.beta[inactive])
            + log_model_prior(self.model_prior, mask)
            + self._log_baseline_null(s.beta0)
        )
        if self.config.delta_prior.mode != "fixed":
            total += log_delta_prior(self.config.delta_prior, s.delta)
        return float(total)

    # -- Step 1: systematic gamma sweep ------------------------------------

    def gamma_log_odds(self, j: int) -> float:
        """Log-odds of including predictor j given the rest of the state."""
        s = self.state
        mask1 = s.gamma.copy()
        mask1[j] = True
        mask0 = s.gamma.copy()
        mask0[j] = False

        ll_obs1, ll_im1, Xg1, bg1 = self._loglik_pair(mask1, s.beta)
        ll_obs0, ll_im0, Xg0, bg0 = self._loglik_pair(mask0, s.beta)
        lp_base1 = log_baseline_prior(self.config.baseline, self.family, Xg1, bg1)
        lp_base0 = log_baseline_prior(self.config.baseline, self.family, Xg0, bg0)
        in1 = 1 + np.flatnonzero(~mask1)
        in0 = 1 + np.flatnonzero(~mask0)
        lp_ps1 = self.pseudo.logpdf(in1, s.beta[in1])
        lp_ps0 = self.pseudo.logpdf(in0, s.beta[in0])
        lap1 = self.cache.get(mask1).assemble(s.delta)
        lap0 = self.cache.get(mask0).assemble(s.delta)
        lp_m1 = log_model_prior(self.model_prior, mask1)
        lp_m0 = log_model_prior(self.model_prior, mask0)
        return (
            (ll_obs1 - ll_obs0)
            + (ll_im1 - ll_im0) / s.delta
            + (lp_base1 - lp_base0)
            + (lp_ps1 - lp_ps0)
            + (lap0 - lap1)
            + (lp_m1 - lp_m0)
        )

    def gamma_sweep(self) -> np.ndarray:
        s = self.state
        for j in range(self.p):
            try:
                log_odds = self.gamma_log_odds(j)
            except PepGlmError:
                self.events["gamma_retained_nonfinite"] += 1
                logger.debug("gamma sweep: fit failure at predictor %d; retained", j)
                continue
            if not np.isfinite(log_odds):
                self.events["gamma_retained_nonfinite"] += 1
                logger.debug("gamma sweep: non-finite odds at predictor %d; retained", j)
                continue
            s.gamma[j] = self.rng.random() < expit(log_odds)
        return s.gamma

    # -- Steps 3-4: active coefficients and pseudo-prior refresh ----------

    def beta_update(self) -> np.ndarray:
        """Independence M-H draw of the active coefficients.

        The proposal is the normal approximation at the ML estimate of a
        weighted regression on the stacked responses (y, y*) with
        weights (1, 1/delta).
        """
        s = self.state
        cols = self._active_cols(s.gamma)
        Xg = self.dataset.X[:, cols]
        y_all = np.concatenate([self.dataset.y, s.y_star])
        X_all = np.vstack([Xg, Xg])
        w_all = np.concatenate(
            [np.ones(self.dataset.n), np.full(self.dataset.n, 1.0 / s.delta)]
        )
        trials = self.dataset.trials
        fam_all = self.family.with_trials(
            None if trials is None else np.concatenate([trials, trials])
        )
        try:
            fit = irls_fit(fam_all, y_all, X_all, obs_weights=w_all,
                           ridge=self.ridge, start=s.beta[cols])
            if not fit.converged:
                raise PepGlmError("weighted fit did not converge")
            chol_info = cholesky(fit.observed_info, lower=True, check_finite=False)
        except (PepGlmError, np.linalg.LinAlgError):
            self.events["beta_fit_skipped"] += 1
            return s.beta

        current = s.beta[cols]
        proposal = _mvn_draw(fit.beta_hat, chol_info, self.rng)
        eta_new = Xg @ proposal
        eta_cur = Xg @ current
        ll_obs_new = float(self.family.loglik_terms(self.dataset.y, eta_new).sum())
        ll_obs_cur = float(self.family.loglik_terms(self.dataset.y, eta_cur).sum())
        ll_im_new = float(self.family.loglik_terms(s.y_star, eta_new).sum())
        ll_im_cur = float(self.family.loglik_terms(s.y_star, eta_cur).sum())
        lp_new = log_baseline_prior(self.config.baseline, self.family, Xg, proposal)
        lp_cur = log_baseline_prior(self.config.baseline, self.family, Xg, current)
        log_alpha = (
            (ll_obs_new - ll_obs_cur)
            + (ll_im_new - ll_im_cur) / s.delta
            + (lp_new - lp_cur)
            + _mvn_logpdf_from_info(current, fit.beta_hat, chol_info)
            - _mvn_logpdf_from_info(proposal, fit.beta_hat, chol_info)
        )
        self._tally("beta", log_alpha, lambda: s.beta.__setitem__(cols, proposal))
        return s.beta

    def pseudo_refresh(self) -> np.ndarray:
        s = self.state
        inactive = 1 + np.flatnonzero(~s.gamma)
        if inactive.size:
            s.beta[inactive] = self.pseudo.draw(inactive, self.rng)
        return s.beta

    # -- Step 5: reference-model intercept ---------------------------------

    def beta0_update(self) -> float:
        s = self.state
        try:
            mean, null_info = self._null_mode(s.y_star)
        except PepGlmError:
            self.events["beta_fit_skipped"] += 1
            return s.beta0
        psi = self.psi
        sd = float(np.sqrt(psi / null_info))
        proposal = mean + sd * self.rng.standard_normal()
        ll_new = self._loglik_null(s.y_star, proposal)
        ll_cur = self._loglik_null(s.y_star, s.beta0)
        lp_new = self._log_baseline_null(proposal)
        lp_cur = self._log_baseline_null(s.beta0)

        def _norm_logpdf(x):
            return -0.5 * ((x - mean) / sd) ** 2 - np.log(sd) - 0.5 * _LOG_2PI

        log_alpha = (
            (ll_new - ll_cur) / psi
            + (lp_new - lp_cur)
            + _norm_logpdf(s.beta0)
            - _norm_logpdf(proposal)
        )

        def _apply():
            s.beta0 = proposal

        self._tally("beta0", log_alpha, _apply)
        return s.beta0

    # -- Step 6: imaginary data --------------------------------------------

    def _ystar_proposal_params(self):
        """Per-observation proposal parameters from the current state."""
        s = self.state
        cols = self._active_cols(s.gamma)
        eta = self.dataset.X[:, cols] @ s.beta[cols]
        psi = self.psi
        kind = self.family.kind
        if kind == "binomial":
            log_p0 = _log_sigmoid(s.beta0)
            log_q0 = _log_sigmoid(-s.beta0)
            a = log_p0 / psi + _log_sigmoid(eta) / s.delta
            b = log_q0 / psi + _log_sigmoid(-eta) / s.delta
            return {"log_p": _log_sigmoid(a - b), "log_q": _log_sigmoid(b - a)}
        if kind == "poisson":
            if self.config.reference_mode == "cr":
                log_lam = np.clip(s.beta0 + eta / s.delta, -700.0, 27.0)
                return {"log_lam": log_lam, "walk": False}
            lam = np.maximum(s.y_star, 0.5)
            return {"lam": lam, "walk": True}
        var = 1.0 / (1.0 / s.delta + 1.0 / psi)
        mean = var * (eta / s.delta + s.beta0 / psi)
        return {"mean": mean, "var": var}

    def ystar_update(self) -> np.ndarray:
        s = self.state
        n = self.dataset.n
        params = self._ystar_proposal_params()
        kind = self.family.kind
        if kind == "binomial":
            trials = self.dataset.trials
            n_arr = 1 if trials is None else trials.astype(int)
            proposal = self.rng.binomial(n_arr, np.exp(params["log_p"]), size=n).astype(float)
            log_q_prop = _binom_logpmf(proposal, trials, params["log_p"], params["log_q"])
            log_q_cur = _binom_logpmf(s.y_star, trials, params["log_p"], params["log_q"])
        elif kind == "poisson":
            if params["walk"]:
                lam_fwd = params["lam"]
                proposal = self.rng.poisson(lam_fwd).astype(float)
                lam_rev = np.maximum(proposal, 0.5)
                log_q_prop = _poisson_logpmf(proposal, np.log(lam_fwd))
                log_q_cur = _poisson_logpmf(s.y_star, np.log(lam_rev))
            else:
                log_lam = params["log_lam"]
                proposal = self.rng.poisson(np.exp(log_lam)).astype(float)
                log_q_prop = _poisson_logpmf(proposal, log_lam)
                log_q_cur = _poisson_logpmf(s.y_star, log_lam)
        else:
            sd = float(np.sqrt(params["var"]))
            proposal = params["mean"] + sd * self.rng.standard_normal(n)
            z_prop = (proposal - params["mean"]) / sd
            z_cur = (s.y_star - params["mean"]) / sd
            log_q_prop = float(-0.5 * z_prop @ z_prop) - n * np.log(sd)
            log_q_cur = float(-0.5 * z_cur @ z_cur) - n * np.log(sd)

        cols = self._active_cols(s.gamma)
        Xg = self.dataset.X[:, cols]
        cur_parts = self.cache.get(s.gamma)
        try:
            prop_parts = laplace_parts(
                self.family, self.config.baseline, proposal, Xg,
                ridge=self.ridge, start=cur_parts.beta_hat,
            )
            if not prop_parts.converged:
                raise PepGlmError("mode fit at proposed imaginary data did not converge")
        except (PepGlmError, np.linalg.LinAlgError):
            self.events["ystar_fit_rejected"] += 1
            self.counters["ystar"].proposed += 1
            return s.y_star

        eta = Xg @ s.beta[cols]
        psi = self.psi
        ll_im_new = float(self.family.loglik_terms(proposal, eta).sum())
        ll_im_cur = float(self.family.loglik_terms(s.y_star, eta).sum())
        ll0_new = self._loglik_null(proposal, s.beta0)
        ll0_cur = self._loglik_null(s.y_star, s.beta0)
        log_alpha = (
            (ll_im_new - ll_im_cur) / s.delta
            + (ll0_new - ll0_cur) / psi
            + cur_parts.assemble(s.delta)
            - prop_parts.assemble(s.delta)
            + log_q_cur
            - log_q_prop
        )

        def _apply():
            s.y_star = proposal
            self.cache.invalidate()
            self.cache.parts[s.gamma.tobytes()] = prop_parts
            self.cache.warm[s.gamma.tobytes()] = prop_parts.beta_hat

        self._tally("ystar", log_alpha, _apply)
        return s.y_star

    # -- Step 7: power parameter -------------------------------------------

    def delta_update(self) -> float:
        s = self.state
        if self.config.delta_prior.mode == "fixed":
            return s.delta
        # Random walk with mean delta and variance s^2 = delta:
        # shape delta^2/s^2 = delta, rate delta/s^2 = 1.
        shape_fwd, rate_fwd = s.delta, 1.0
        proposal = float(self.rng.gamma(shape_fwd, 1.0 / rate_fwd))
        if proposal <= 0 or not np.isfinite(proposal):
            self.counters["delta"].proposed += 1
            return s.delta
        shape_rev, rate_rev = proposal, 1.0

        parts = self.cache.get(s.gamma)
        cols = self._active_cols(s.gamma)
        eta = self.dataset.X[:, cols] @ s.beta[cols]
        ll_im = float(self.family.loglik_terms(s.y_star, eta).sum())
        d_gamma = cols.size
        psi_new = self._psi_for(proposal)
        psi_cur = self._psi_for(s.delta)
        log_a = (
            0.5 * d_gamma * (np.log(s.delta) - np.log(proposal))
            + (1.0 / proposal - 1.0 / s.delta) * (ll_im - parts.log_lik_hat)
            + (1.0 / psi_new - 1.0 / psi_cur) * self._loglik_null(s.y_star, s.beta0)
            + log_delta_prior(self.config.delta_prior, proposal)
            - log_delta_prior(self.config.delta_prior, s.delta)
            + _gamma_logpdf(s.delta, shape_rev, rate_rev)
            - _gamma_logpdf(proposal, shape_fwd, rate_fwd)
        )

        def _apply():
            s.delta = proposal

        self._tally("delta", log_a, _apply)
        return s.delta

    # -- machinery ----------------------------------------------------------

    def _tally(self, move: str, log_alpha: float, apply_fn) -> None:
        # A log-ratio of -inf is a certain rejection (ratio 0, still a
        # valid probability); only NaN or +inf count as pathological.
        c = self.counters[move]
        c.proposed += 1
        self.events["ratio_evaluations"] += 1
        if np.isnan(log_alpha) or log_alpha == np.inf:
            self.events["nonfinite_ratios"] += 1
            return
        if log_alpha >= 0 or self.rng.random() < np.exp(log_alpha):
            c.accepted += 1
            apply_fn()

    def run(self) -> ChainOutput:
        cfg = self.config
        retained = cfg.iterations - cfg.burn_in
        gamma_draws = np.empty((retained, self.p), dtype=np.uint8)
        delta_draws = np.empty(retained)
        beta_draws = (
            np.empty((retained, self.p + 1)) if cfg.record_beta else None
        )
        visited: dict[tuple, int] = {}
        sweep = cfg.fixed_gamma is None
        for t in range(cfg.iterations):
            if sweep:
                self.gamma_sweep()
            self.beta_update()
            self.pseudo_refresh()
            self.beta0_update()
            self.ystar_update()
            self.delta_update()
            k = t - cfg.burn_in
            if k >= 0:
                gamma_draws[k] = self.state.gamma
                delta_draws[k] = self.state.delta
                if beta_draws is not None:
                    beta_draws[k] = self.state.beta
                key = tuple(int(b) for b in self.state.gamma)
                visited[key] = visited.get(key, 0) + 1
        return ChainOutput(
            gamma_draws=gamma_draws,
            delta_draws=delta_draws,
            acceptance_rates={k: c.rate() for k, c in self.counters.items()},
            visited_models=visited,
            diagnostics=dict(self.events),
            config=cfg,
            beta_draws=beta_draws,
        )


def init_state(config: SamplerConfig, dataset: Dataset) -> SamplerState:
    """Starting values: full model, ML estimates, y* = y, delta = n."""
    family = config.family.with_trials(dataset.trials)
    ridge = max(config.resolved_ridge(), SAMPLER_RIDGE)
    full = irls_fit(family, dataset.y, dataset.X, ridge=ridge)
    if not (full.converged and np.all(np.isfinite(full.beta_hat))):
        raise PepGlmError("full-model fit failed; the data are unusable")
    null = irls_fit(family, dataset.y, np.ones((dataset.n, 1)), ridge=ridge)
    if config.delta_prior.mode == "fixed" and config.delta_prior.fixed_value is not None:
        delta0 = float(config.delta_prior.fixed_value)
    else:
        delta0 = float(dataset.n)
    return SamplerState(
        gamma=np.ones(dataset.p, dtype=bool),
        beta=full.beta_hat.copy(),
        beta0=float(null.beta_hat[0]),
        y_star=dataset.y.copy(),
        delta=delta0,
    )


def run_chain(config: SamplerConfig, dataset: Dataset) -> ChainOutput:
    """Run the PEP-GVS chain; deterministic given (config, dataset, seed)."""
    return PepGvs(config, dataset).run()


class GPriorGvs:
    """GVS chain over (gamma, beta, g) for the g-prior comparators."""

    def __init__(self, gprior: GPriorConfig, config: SamplerConfig, dataset: Dataset):
        self.gprior = gprior
        self.config = config
        self.dataset = dataset
        self.family = config.family.with_trials(dataset.trials)
        dataset.validate_for(config.family)
        self.ridge = max(config.resolved_ridge(), SAMPLER_RIDGE)
        self.p = dataset.p
        if config.model_prior is None:
            self.model_prior = ModelPrior("uniform", self.p)
        else:
            if config.model_prior.p != self.p:
                raise ConfigurationError("model prior dimension does not match the data")
            self.model_prior = config.model_prior
        self.rng = np.random.default_rng(config.seed)

        null = irls_fit(self.family, dataset.y, np.ones((dataset.n, 1)), ridge=self.ridge)
        eta0 = np.full(dataset.n, null.beta_hat[0])
        self.w0 = self.family.variance_fn(eta0)

        full = irls_fit(self.family, dataset.y, dataset.X, ridge=self.ridge)
        cov = np.linalg.inv(full.observed_info + self.ridge * np.eye(self.p + 1))
        self.pseudo = PseudoPrior(means=full.beta_hat, sds=np.sqrt(np.diag(cov)))

        self.gamma = np.ones(self.p, dtype=bool)
        self.beta = full.beta_hat.copy()
        self.g = float(gprior.g) if gprior.g is not None else float(dataset.n)
        self._fit_cache: dict[bytes, tuple] = {}
        self.counters = {k: _Counter() for k in ("beta", "g")}
        self.events = {
            "gamma_retained_nonfinite": 0,
            "beta_fit_skipped": 0,
            "nonfinite_ratios": 0,
            "ratio_evaluations": 0,
        }
        if config.fixed_gamma is not None:
            self.gamma = np.asarray(config.fixed_gamma, dtype=bool).copy()

    def _active_cols(self, mask):
        return np.concatenate(([0], 1 + np.flatnonzero(mask)))

    def _log_gprior(self, mask, beta_full, g):
        cols = self._active_cols(mask)
        return log_gprior_density(
            self.gprior, self.family, self.dataset.X[:, cols],
            beta_full[cols], g, self.w0,
        )

    def gamma_log_odds(self, j: int) -> float:
        mask1 = self.gamma.copy()
        mask1[j] = True
        mask0 = self.gamma.copy()
        mask0[j] = False
        out = 0.0
        for sign, mask in ((1.0, mask1), (-1.0, mask0)):
            cols = self._active_cols(mask)
            eta = self.dataset.X[:, cols] @ self.beta[cols]
            ll = float(self.family.loglik_terms(self.dataset.y, eta).sum())
            inactive = 1 + np.flatnonzero(~mask)
            out += sign * (
                ll
                + self._log_gprior(mask, self.beta, self.g)
                + self.pseudo.logpdf(inactive, self.beta[inactive])
                + log_model_prior(self.model_prior, mask)
            )
            if self.gprior.kind == "mg-hyper-g":
                out += sign * log_g_hyperprior(self.gprior, self.g,
                                               self.dataset.n, cols.size)
        return out

    def gamma_sweep(self):
        for j in range(self.p):
            try:
                log_odds = self.gamma_log_odds(j)
            except PepGlmError:
                self.events["gamma_retained_nonfinite"] += 1
                continue
            if not np.isfinite(log_odds):
                self.events["gamma_retained_nonfinite"] += 1
                continue
            self.gamma[j] = self.rng.random() < expit(log_odds)

    def _model_fit(self, mask):
        key = mask.tobytes()
        hit = self._fit_cache.get(key)
        if hit is not None:
            return hit
        cols = self._active_cols(mask)
        fit = irls_fit(self.family, self.dataset.y, self.dataset.X[:, cols],
                       ridge=self.ridge)
        if not fit.converged:
            raise PepGlmError("model fit did not converge")
        chol_info = cholesky(fit.observed_info, lower=True, check_finite=False)
        entry = (fit.beta_hat, chol_info)
        self._fit_cache[key] = entry
        return entry

    def beta_update(self):
        cols = self._active_cols(self.gamma)
        try:
            beta_hat, chol_info = self._model_fit(self.gamma)
        except (PepGlmError, np.linalg.LinAlgError):
            self.events["beta_fit_skipped"] += 1
            return self.beta
        current = self.beta[cols]
        proposal = _mvn_draw(beta_hat, chol_info, self.rng)
        Xg = self.dataset.X[:, cols]
        ll_new = float(self.family.loglik_terms(self.dataset.y, Xg @ proposal).sum())
        ll_cur = float(self.family.loglik_terms(self.dataset.y, Xg @ current).sum())
        full_new = self.beta.copy()
        full_new[cols] = proposal
        lp_new = self._log_gprior(self.gamma, full_new, self.g)
        lp_cur = self._log_gprior(self.gamma, self.beta, self.g)
        log_alpha = (
            (ll_new - ll_cur)
            + (lp_new - lp_cur)
            + _mvn_logpdf_from_info(current, beta_hat, chol_info)
            - _mvn_logpdf_from_info(proposal, beta_hat, chol_info)
        )
        self._tally("beta", log_alpha,
                    lambda: self.beta.__setitem__(cols, proposal))
        return self.beta

    def pseudo_refresh(self):
        inactive = 1 + np.flatnonzero(~self.gamma)
        if inactive.size:
            self.beta[inactive] = self.pseudo.draw(inactive, self.rng)

    def g_update(self):
        if self.gprior.kind == "unit-info-g":
            return self.g
        shape_fwd = self.g
        proposal = float(self.rng.gamma(shape_fwd, 1.0))
        if proposal <= 0 or not np.isfinite(proposal):
            self.counters["g"].proposed += 1
            return self.g
        d_gamma = int(self.gamma.sum()) + 1
        log_a = (
            self._log_gprior(self.gamma, self.beta, proposal)
            - self._log_gprior(self.gamma, self.beta, self.g)
            + log_g_hyperprior(self.gprior, proposal, self.dataset.n, d_gamma)
            - log_g_hyperprior(self.gprior, self.g, self.dataset.n, d_gamma)
            + _gamma_logpdf(self.g, proposal, 1.0)
            - _gamma_logpdf(proposal, shape_fwd, 1.0)
        )

        def _apply():
            self.g = proposal

        self._tally("g", log_a, _apply)
        return self.g

    def _tally(self, move, log_alpha, apply_fn):
        c = self.counters[move]
        c.proposed += 1
        self.events["ratio_evaluations"] += 1
        if np.isnan(log_alpha) or log_alpha == np.inf:
            self.events["nonfinite_ratios"] += 1
            return
        if log_alpha >= 0 or self.rng.random() < np.exp(log_alpha):
            c.accepted += 1
            apply_fn()

    def run(self) -> ChainOutput:
        cfg = self.config
        retained = cfg.iterations - cfg.burn_in
        gamma_draws = np.empty((retained, self.p), dtype=np.uint8)
        g_draws = np.empty(retained)
        beta_draws = np.empty((retained, self.p + 1)) if cfg.record_beta else None
        visited: dict[tuple, int] = {}
        sweep = cfg.fixed_gamma is None
        for t in range(cfg.iterations):
            if sweep:
                self.gamma_sweep()
            self.beta_update()
            self.pseudo_refresh()
            self.g_update()
            k = t - cfg.burn_in
            if k >= 0:
                gamma_draws[k] = self.gamma
                g_draws[k] = self.g
                if beta_draws is not None:
                    beta_draws[k] = self.beta
                key = tuple(int(b) for b in self.gamma)
                visited[key] = visited.get(key, 0) + 1
        return ChainOutput(
            gamma_draws=gamma_draws,
            delta_draws=g_draws,
            acceptance_rates={k: c.rate() for k, c in self.counters.items()},
            visited_models=visited,
            diagnostics=dict(self.events),
            config=(self.gprior, cfg),
            beta_draws=beta_draws,
        )


def run_gprior_chain(
    gprior: GPriorConfig, config: SamplerConfig, dataset: Dataset
) -> ChainOutput:
    """Run the comparator GVS chain; deterministic given the seed."""
    return GPriorGvs(gprior, config, dataset).run()
