"""Log-densities for the prior stack.

Baseline priors on regression coefficients (flat / Jeffreys), hyper
priors on the power parameter delta, priors on the model space, and the
g-prior comparator family with its hyper priors on g.  Everything is
evaluated on the log scale; improper densities are unnormalized, which
causes no indeterminacy in the odds ratios where they appear.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betaln, gammaln

from .exceptions import ConfigurationError, EvaluationError
from .families import GlmFamily, observed_information

__all__ = [
    "BaselinePrior",
    "DeltaPrior",
    "ModelPrior",
    "GPriorConfig",
    "log_baseline_prior",
    "log_delta_prior",
    "log_model_prior",
    "log_gprior_density",
    "log_g_hyperprior",
]

_LOG_2PI = float(np.log(2.0 * np.pi))

# Maruyama-George beta-prime mixing density: fixed first shape parameter,
# second chosen so the implied slab matches (n - d) / 2 - a - 2.
MG_SHAPE_A = -0.75


@dataclass(frozen=True)
class BaselinePrior:
    """Default prior on beta: ``flat`` (log-density 0) or GLM ``jeffreys``."""

    kind: str = "jeffreys"

    def __post_init__(self):
        if self.kind not in ("flat", "jeffreys"):
            raise ConfigurationError(f"unknown baseline prior: {self.kind!r}")


@dataclass(frozen=True)
class DeltaPrior:
    """Power-parameter specification: fixed value or a hyper prior.

    ``hyper``   : pi(d) = (a-2)/2 * (1+d)^(-a/2)
    ``hyper-n`` : pi(d) = (a-2)/(2n) * (1+d/n)^(-a/2)
    """

    mode: str = "fixed"
    fixed_value: float | None = None
    a: float = 3.0
    n: int | None = None

    def __post_init__(self):
        if self.mode not in ("fixed", "hyper", "hyper-n"):
            raise ConfigurationError(f"unknown delta prior mode: {self.mode!r}")
        if self.mode != "fixed" and self.a <= 2:
            raise ConfigurationError("hyper prior on delta requires a > 2")
        if self.mode == "hyper-n" and self.n is None:
            raise ConfigurationError("hyper-n delta prior requires the sample size")
        if self.fixed_value is not None and self.fixed_value <= 0:
            raise ConfigurationError("fixed delta must be positive")


@dataclass(frozen=True)
class ModelPrior:
    """Prior over the 2^p inclusion vectors: uniform or beta-binomial."""

    kind: str = "uniform"
    p: int = 0

    def __post_init__(self):
        if self.kind not in ("uniform", "beta-binomial"):
            raise ConfigurationError(f"unknown model prior: {self.kind!r}")
        if self.p < 0:
            raise ConfigurationError("p must be nonnegative")


@dataclass(frozen=True)
class GPriorConfig:
    """g-prior comparator settings.

    ``unit-info-g`` fixes g at the sample size; the hyper modes put
    hyper-g / hyper-g/n / Maruyama-George beta-prime priors on g.
    """

    kind: str = "unit-info-g"
    g: float | None = None
    a: float = 3.0

    def __post_init__(self):
        if self.kind not in ("unit-info-g", "hyper-g", "hyper-g-n", "mg-hyper-g"):
            raise ConfigurationError(f"unknown g-prior kind: {self.kind!r}")
        if self.kind in ("hyper-g", "hyper-g-n") and self.a <= 2:
            raise ConfigurationError("hyper-g priors require a > 2")
        if self.g is not None and self.g <= 0:
            raise ConfigurationError("g must be positive")


def log_baseline_prior(
    prior: BaselinePrior,
    family: GlmFamily,
    X_gamma: np.ndarray,
    beta_gamma: np.ndarray,
) -> float:
    """Unnormalized log baseline density of the active coefficients.

    Jeffreys: 0.5 * log det(X' W(beta) X); for the intercept-only model
    this reduces to half the log trace of the weight matrix.
    """
    if prior.kind == "flat":
        return 0.0
    info = observed_information(family, X_gamma, beta_gamma)
    if not np.all(np.isfinite(info)):
        raise EvaluationError("weight matrix has non-finite entries")
    sign, logdet = np.linalg.slogdet(info)
    if sign < 0:
        raise EvaluationError("weight matrix is not positive semidefinite")
    if sign == 0:
        # Weights underflowed: the density is zero at this point.
        return -np.inf
    return 0.5 * float(logdet)


def log_delta_prior(dp: DeltaPrior, delta: float) -> float:
    if dp.mode == "fixed":
        raise ConfigurationError("fixed delta has no hyper density")
    if delta <= 0:
        return -np.inf
    if dp.mode == "hyper":
        return float(np.log((dp.a - 2.0) / 2.0) - (dp.a / 2.0) * np.log1p(delta))
    return float(
        np.log((dp.a - 2.0) / (2.0 * dp.n)) - (dp.a / 2.0) * np.log1p(delta / dp.n)
    )


def log_model_prior(mp: ModelPrior, gamma: np.ndarray) -> float:
    gamma = np.asarray(gamma)
    if gamma.shape[0] != mp.p:
        raise ConfigurationError("gamma length does not match the model prior")
    if mp.kind == "uniform":
        return -mp.p * float(np.log(2.0))
    k = int(gamma.sum())
    log_choose = gammaln(mp.p + 1) - gammaln(k + 1) - gammaln(mp.p - k + 1)
    return float(-np.log(mp.p + 1) - log_choose)


def log_gprior_density(
    cfg: GPriorConfig,
    family: GlmFamily,
    X_gamma: np.ndarray,
    beta_gamma: np.ndarray,
    g: float,
    w0: np.ndarray,
) -> float:
    """Zero-mean normal log-density over the non-intercept block.

    Covariance g * (Xt' W0 Xt)^(-1), where Xt is the centered
    non-intercept part of ``X_gamma`` and ``w0`` is the diagonal GLM
    weight vector evaluated at the intercept-only fit.  The intercept
    itself carries a flat prior and contributes 0.
    """
    d = X_gamma.shape[1]
    if d <= 1:
        return 0.0
    Xt = X_gamma[:, 1:]
    bt = np.asarray(beta_gamma, dtype=float)[1:]
    M = (Xt * np.asarray(w0)[:, None]).T @ Xt
    sign, logdet = np.linalg.slogdet(M)
    if sign <= 0 or not np.isfinite(logdet):
        raise EvaluationError("g-prior covariance is singular")
    quad = float(bt @ M @ bt) / g
    k = d - 1
    return float(-0.5 * k * (_LOG_2PI + np.log(g)) + 0.5 * logdet - 0.5 * quad)


def log_g_hyperprior(cfg: GPriorConfig, g: float, n: int, d_gamma: int) -> float:
    """Hyper-prior log-density on g for the mixture comparators."""
    if g <= 0:
        return -np.inf
    if cfg.kind == "hyper-g":
        return float(np.log((cfg.a - 2.0) / 2.0) - (cfg.a / 2.0) * np.log1p(g))
    if cfg.kind == "hyper-g-n":
        return float(
            np.log((cfg.a - 2.0) / (2.0 * n)) - (cfg.a / 2.0) * np.log1p(g / n)
        )
    if cfg.kind == "mg-hyper-g":
        a = MG_SHAPE_A
        b = (n - d_gamma) / 2.0 - a - 2.0
        if b <= -1:
            raise ConfigurationError("sample size too small for the MG hyper-g prior")
        return float(
            b * np.log(g) - (a + b + 2.0) * np.log1p(g) - betaln(a + 1.0, b + 1.0)
        )
    raise ConfigurationError("fixed-g configuration has no hyper density")
