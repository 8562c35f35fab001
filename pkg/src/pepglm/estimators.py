"""Scikit-learn style estimators wrapping the GVS chains.

``PepGvsSelector`` and ``GPriorGvsSelector`` follow the sklearn
fit/transform contract: ``fit(X, y)`` runs the chain, ``transform``
keeps the columns of the median-probability model, and ``get_params``
/ ``set_params`` work through ``BaseEstimator``, so the selectors
compose with pipelines and model-selection utilities.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .dataset import build_dataset
from .families import GlmFamily
from .priors import BaselinePrior, DeltaPrior, GPriorConfig, ModelPrior
from .sampler import SamplerConfig, run_chain, run_gprior_chain
from .summaries import summarize

__all__ = ["PepGvsSelector", "GPriorGvsSelector"]


class _GvsSelectorBase(SelectorMixin, BaseEstimator):
    def _more_tags(self):
        return {"requires_y": True}

    def _validate_input(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        return X, y

    def _get_support_mask(self):
        check_is_fitted(self, "mpm_model_")
        return np.asarray(self.mpm_model_, dtype=bool)

    def _finish_fit(self, chain, names):
        batch = 1000 if chain.n_draws >= 1000 else max(1, chain.n_draws // 10)
        summary = summarize(chain, batch_size=batch)
        self.chain_ = chain
        self.summary_ = summary
        self.inclusion_probabilities_ = summary.inclusion_probs
        self.map_model_ = summary.map_model
        self.mpm_model_ = summary.mpm_model
        self.model_probabilities_ = summary.model_probs
        self.shrinkage_mean_ = summary.shrinkage_mean
        self.feature_names_ = names
        return self


class PepGvsSelector(_GvsSelectorBase):
    """Bayesian variable selection under power-expected-posterior priors.

    Parameters
    ----------
    family : str
        Response family: "binomial", "poisson" or "gaussian".
    reference : str
        "cr" (concentrated) or "dr" (diffuse) reference predictive.
    delta : str
        "fixed", "hyper" or "hyper-n" power-parameter treatment.
    delta_value : float or None
        Fixed delta; default is the sample size.
    a : float
        Hyper-prior parameter (> 2).
    baseline : str
        "jeffreys" or "flat" baseline prior on coefficients.
    model_prior : str
        "uniform" or "beta-binomial" prior over models.
    iterations, burn_in, random_state
        Chain length, discarded prefix, and seed.

    Attributes
    ----------
    inclusion_probabilities_ : ndarray of shape (n_features,)
    map_model_, mpm_model_ : tuple of 0/1
    chain_, summary_ : raw draws and post-processed summary
    """

    def __init__(
        self,
        family="binomial",
        reference="cr",
        delta="fixed",
        delta_value=None,
        a=3.0,
        baseline="jeffreys",
        model_prior="uniform",
        iterations=11000,
        burn_in=1000,
        random_state=0,
    ):
        self.family = family
        self.reference = reference
        self.delta = delta
        self.delta_value = delta_value
        self.a = a
        self.baseline = baseline
        self.model_prior = model_prior
        self.iterations = iterations
        self.burn_in = burn_in
        self.random_state = random_state

    def fit(self, X, y, trials=None, feature_names=None):
        X, y = self._validate_input(X, y)
        dataset = build_dataset(y, X, trials=trials, names=feature_names)
        if self.delta == "hyper":
            dp = DeltaPrior("hyper", a=self.a)
        elif self.delta == "hyper-n":
            dp = DeltaPrior("hyper-n", a=self.a, n=dataset.n)
        else:
            dp = DeltaPrior("fixed", fixed_value=self.delta_value)
        cfg = SamplerConfig(
            family=GlmFamily(self.family),
            iterations=self.iterations,
            burn_in=self.burn_in,
            seed=self.random_state,
            reference_mode=self.reference,
            delta_prior=dp,
            baseline=BaselinePrior(self.baseline),
            model_prior=ModelPrior(self.model_prior, dataset.p),
        )
        return self._finish_fit(run_chain(cfg, dataset), dataset.names)


class GPriorGvsSelector(_GvsSelectorBase):
    """Variable selection under the GLM g-prior comparator family.

    ``kind`` is one of "unit-info-g", "hyper-g", "hyper-g-n",
    "mg-hyper-g"; ``g`` defaults to the sample size.
    """

    def __init__(
        self,
        family="binomial",
        kind="unit-info-g",
        g=None,
        a=3.0,
        model_prior="uniform",
        iterations=11000,
        burn_in=1000,
        random_state=0,
    ):
        self.family = family
        self.kind = kind
        self.g = g
        self.a = a
        self.model_prior = model_prior
        self.iterations = iterations
        self.burn_in = burn_in
        self.random_state = random_state

    def fit(self, X, y, trials=None, feature_names=None):
        X, y = self._validate_input(X, y)
        dataset = build_dataset(y, X, trials=trials, names=feature_names)
        cfg = SamplerConfig(
            family=GlmFamily(self.family),
            iterations=self.iterations,
            burn_in=self.burn_in,
            seed=self.random_state,
            model_prior=ModelPrior(self.model_prior, dataset.p),
        )
        gp = GPriorConfig(self.kind, g=self.g, a=self.a)
        return self._finish_fit(run_gprior_chain(gp, cfg, dataset), dataset.names)
