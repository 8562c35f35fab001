"""Exponential-family GLM definitions, weighted log-likelihoods, IRLS fitting.

Canonical links only: logit (binomial), log (Poisson), identity
(Gaussian with known unit variance).  The dispersion is fixed at 1
throughout, so the canonical parameter equals the linear predictor and
the observation weight matrix is ``diag(w_i * b''(eta_i))``.

All likelihood work is done in the log domain.  Observation weights
multiply the complete per-observation log-likelihood term (including
the y-only normalizing part), so weights ``1/delta`` realize the
powered likelihood ``f(y | beta)^(1/delta)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import expit, gammaln

from .exceptions import (
    DataValidationError,
    FitDivergedError,
    NumericalRangeError,
    SingularSystemError,
)

__all__ = [
    "GlmFamily",
    "FitResult",
    "binomial",
    "poisson",
    "gaussian",
    "log_likelihood",
    "score",
    "observed_information",
    "irls_fit",
]

# IRLS stopping rules: the sampler calls the fitter every iteration,
# so the tolerances are tight but the iteration count bounded.
IRLS_MAX_ITER = 50
IRLS_SCORE_TOL = 1e-8
IRLS_RELATIVE_LL_TOL = 1e-10
IRLS_MAX_HALVINGS = 10
# Newton steps through near-flat likelihood regions (ridge-dominated
# Hessian under near-separation) are capped componentwise; without the
# cap the iterates catapult to |beta| ~ score/ridge and crawl back.
IRLS_STEP_CAP = 10.0

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class GlmFamily:
    """Exponential-family specification under the canonical link.

    Parameters
    ----------
    kind : str
        One of ``"binomial"``, ``"poisson"``, ``"gaussian"``.
    trials : ndarray or None
        Per-observation trial counts (binomial only; ``None`` means 1).
    variance : float
        Response variance for the Gaussian family; fixed at 1.
    """

    kind: str
    trials: np.ndarray | None = None
    variance: float = 1.0

    def __post_init__(self):
        if self.kind not in ("binomial", "poisson", "gaussian"):
            raise DataValidationError(f"unknown family kind: {self.kind!r}")
        if self.kind == "gaussian" and self.variance != 1.0:
            raise DataValidationError("gaussian family supports variance=1 only")
        if self.trials is not None:
            t = np.asarray(self.trials)
            if np.any(t < 1) or np.any(t != np.floor(t)):
                raise DataValidationError("trials must be positive integers")
            object.__setattr__(self, "trials", np.asarray(t, dtype=float))

    def with_trials(self, trials: np.ndarray | None) -> "GlmFamily":
        return replace(self, trials=trials)

    def _n_trials(self, n: int) -> np.ndarray:
        if self.trials is None:
            return np.ones(n)
        if self.trials.shape[0] != n:
            raise DataValidationError("trials length does not match data")
        return self.trials

    # Mean and variance function on the linear-predictor scale.

    def mean(self, eta: np.ndarray) -> np.ndarray:
        if self.kind == "binomial":
            pi = expit(eta)
            return pi if self.trials is None else self._n_trials(eta.shape[0]) * pi
        if self.kind == "poisson":
            with np.errstate(over="ignore"):
                return np.exp(eta)
        return eta

    def variance_fn(self, eta: np.ndarray) -> np.ndarray:
        """b''(eta): variance of the response at linear predictor eta."""
        if self.kind == "binomial":
            pi = expit(eta)
            v = pi * (1.0 - pi)
            return v if self.trials is None else self._n_trials(eta.shape[0]) * v
        if self.kind == "poisson":
            with np.errstate(over="ignore"):
                return np.exp(eta)
        return np.ones_like(eta)

    def link(self, mu: np.ndarray) -> np.ndarray:
        if self.kind == "binomial":
            pi = mu / self._n_trials(np.asarray(mu).shape[0])
            return np.log(pi) - np.log1p(-pi)
        if self.kind == "poisson":
            return np.log(mu)
        return mu

    def inverse_link(self, eta: np.ndarray) -> np.ndarray:
        return self.mean(eta)

    def loglik_terms(self, y: np.ndarray, eta: np.ndarray) -> np.ndarray:
        """Per-observation log-likelihood, normalizing constant included."""
        if self.kind == "binomial":
            if self.trials is None:
                # Single-trial data: the binomial coefficient is 1.
                return y * eta - np.logaddexp(0.0, eta)
            ntr = self._n_trials(y.shape[0])
            binom = gammaln(ntr + 1) - gammaln(y + 1) - gammaln(ntr - y + 1)
            return y * eta - ntr * np.logaddexp(0.0, eta) + binom
        if self.kind == "poisson":
            with np.errstate(over="ignore"):  # overflow -> -inf terms
                return y * eta - np.exp(eta) - gammaln(y + 1)
        return -0.5 * (y - eta) ** 2 - 0.5 * _LOG_2PI

    def validate_response(self, y: np.ndarray) -> None:
        if self.kind == "binomial":
            ntr = self._n_trials(y.shape[0])
            ok = np.all((y >= 0) & (y <= ntr) & (y == np.floor(y)))
            if not ok:
                raise DataValidationError("binomial response must satisfy 0 <= y_i <= N_i (integer)")
        elif self.kind == "poisson":
            if np.any(y < 0) or np.any(y != np.floor(y)):
                raise DataValidationError("poisson response must be a nonnegative integer")


def binomial(trials: np.ndarray | None = None) -> GlmFamily:
    return GlmFamily("binomial", trials=trials)


def poisson() -> GlmFamily:
    return GlmFamily("poisson")


def gaussian() -> GlmFamily:
    return GlmFamily("gaussian")


def _linear_predictor(X: np.ndarray, beta: np.ndarray) -> np.ndarray:
    if X.shape[1] != beta.shape[0]:
        raise DataValidationError(
            f"design has {X.shape[1]} columns but beta has {beta.shape[0]} entries"
        )
    eta = X @ beta
    if not np.all(np.isfinite(eta)):
        raise NumericalRangeError("non-finite linear predictor")
    return eta


def log_likelihood(
    family: GlmFamily,
    y: np.ndarray,
    X: np.ndarray,
    beta: np.ndarray,
    obs_weights: np.ndarray | float | None = None,
) -> float:
    """Weighted log-likelihood sum(w_i * l_i(beta)).

    Weight 1 on every observation reproduces the ordinary
    log-likelihood; constant weight ``1/delta`` gives the log of the
    powered likelihood.
    """
    y = np.asarray(y, dtype=float)
    family.validate_response(y)
    eta = _linear_predictor(np.asarray(X, dtype=float), np.asarray(beta, dtype=float))
    terms = family.loglik_terms(y, eta)
    if obs_weights is None:
        return float(terms.sum())
    w = np.broadcast_to(np.asarray(obs_weights, dtype=float), y.shape)
    if np.any(w <= 0):
        raise DataValidationError("observation weights must be strictly positive")
    return float(w @ terms)


def score(
    family: GlmFamily,
    y: np.ndarray,
    X: np.ndarray,
    beta: np.ndarray,
    obs_weights: np.ndarray | float | None = None,
) -> np.ndarray:
    """Analytic score of the weighted log-likelihood (canonical link)."""
    eta = _linear_predictor(X, beta)
    resid = y - family.mean(eta)
    if obs_weights is not None:
        resid = resid * np.broadcast_to(np.asarray(obs_weights, dtype=float), resid.shape)
    return X.T @ resid


def observed_information(
    family: GlmFamily,
    X: np.ndarray,
    beta: np.ndarray,
    obs_weights: np.ndarray | float | None = None,
) -> np.ndarray:
    """X' W X with W = diag(w_i * b''(eta_i))."""
    eta = _linear_predictor(X, beta)
    w = family.variance_fn(eta)
    if obs_weights is not None:
        w = w * np.broadcast_to(np.asarray(obs_weights, dtype=float), w.shape)
    return (X * w[:, None]).T @ X


@dataclass
class FitResult:
    """Outcome of an IRLS fit.

    ``observed_info`` excludes the ridge term; ``log_lik`` is the
    weighted log-likelihood at ``beta_hat``.
    """

    beta_hat: np.ndarray
    observed_info: np.ndarray
    log_lik: float
    converged: bool
    iterations: int


def irls_fit(
    family: GlmFamily,
    y: np.ndarray,
    X: np.ndarray,
    obs_weights: np.ndarray | float | None = None,
    ridge: float = 0.0,
    start: np.ndarray | None = None,
    max_iter: int = IRLS_MAX_ITER,
) -> FitResult:
    """Newton/IRLS maximization of the weighted log-likelihood.

    ``ridge >= 0`` adds ``ridge * I`` to the Hessian (and the matching
    quadratic penalty to the objective) so that separated binomial
    configurations stay finite.  Step-halving is applied when the
    penalized objective decreases.
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if y.shape[0] != X.shape[0]:
        raise DataValidationError("response and design have different lengths")
    if ridge < 0:
        raise DataValidationError("ridge must be nonnegative")
    family.validate_response(y)
    n, d = X.shape
    w = None if obs_weights is None else np.broadcast_to(
        np.asarray(obs_weights, dtype=float), (n,)
    )

    beta = np.zeros(d) if start is None else np.asarray(start, dtype=float).copy()
    eye = ridge * np.eye(d)

    def eval_at(b):
        eta = X @ b
        terms = family.loglik_terms(y, eta)
        ll = float(terms.sum()) if w is None else float(w @ terms)
        return eta, ll - 0.5 * ridge * float(b @ b)

    eta, obj = eval_at(beta)
    if not np.isfinite(obj) and obj != -np.inf:
        raise FitDivergedError("non-finite objective at the starting value")
    converged = False
    iterations = 0
    for _ in range(max_iter):
        resid = y - family.mean(eta)
        if w is not None:
            resid = resid * w
        g = X.T @ resid - ridge * beta
        if not np.all(np.isfinite(g)):
            raise FitDivergedError("non-finite score during IRLS")
        if np.max(np.abs(g)) < IRLS_SCORE_TOL:
            converged = True
            break
        wvar = family.variance_fn(eta)
        if w is not None:
            wvar = wvar * w
        info = (X * wvar[:, None]).T @ X + eye
        if not np.all(np.isfinite(info)):
            raise FitDivergedError("non-finite weights during IRLS")
        try:
            cho = cho_factor(info, lower=True, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise SingularSystemError(str(exc)) from exc
        step = cho_solve(cho, g, check_finite=False)
        if family.kind != "gaussian":  # quadratic objectives take full steps
            largest = np.max(np.abs(step))
            if largest > IRLS_STEP_CAP:
                step = step * (IRLS_STEP_CAP / largest)
        new_beta = beta + step
        new_eta, new_obj = eval_at(new_beta)
        for _ in range(IRLS_MAX_HALVINGS):
            if np.isfinite(new_obj) and new_obj >= obj - 1e-12:
                break
            step = 0.5 * step
            new_beta = beta + step
            new_eta, new_obj = eval_at(new_beta)
        iterations += 1
        rel_change = abs(new_obj - obj) / (1.0 + abs(obj))
        beta, eta, obj = new_beta, new_eta, new_obj
        if not np.isfinite(obj):
            raise FitDivergedError("objective diverged during IRLS")
        if rel_change < IRLS_RELATIVE_LL_TOL:
            resid = y - family.mean(eta)
            if w is not None:
                resid = resid * w
            g = X.T @ resid - ridge * beta
            converged = bool(np.max(np.abs(g)) < np.sqrt(IRLS_SCORE_TOL))
            break

    wvar = family.variance_fn(eta)
    if w is not None:
        wvar = wvar * w
    terms = family.loglik_terms(y, eta)
    return FitResult(
        beta_hat=beta,
        observed_info=(X * wvar[:, None]).T @ X,
        log_lik=float(terms.sum()) if w is None else float(w @ terms),
        converged=converged,
        iterations=iterations,
    )
