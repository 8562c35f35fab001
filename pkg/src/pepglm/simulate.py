"""Synthetic study designs and replicated method comparisons.

Study 1 draws predictors from a zero-mean normal with correlation
r^|i-j| (logistic p=5 or Poisson p=3, n=100); Study 2 uses five
standard-normal predictors plus five noisy linear combinations of them
(logistic, p=10, n=200).  ``replicate_compare`` runs a set of prior
configurations over replicated datasets, recording whether each
method's MAP model recovers the data-generating model together with
the per-predictor inclusion probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from scipy.special import expit

from .dataset import Dataset, build_dataset
from .exceptions import ConfigurationError, PepGlmError
from .families import GlmFamily
from .priors import BaselinePrior, DeltaPrior, GPriorConfig, ModelPrior
from .sampler import ChainOutput, SamplerConfig, run_chain, run_gprior_chain
from .summaries import summarize

__all__ = [
    "ScenarioSpec",
    "METHOD_NAMES",
    "gen_study1",
    "gen_study2",
    "generate",
    "make_method_chain",
    "replicate_compare",
]

# The ten prior configurations compared in the experiments.
METHOD_NAMES = (
    "g-prior",
    "hyper-g",
    "hyper-g/n",
    "mg-hyper-g",
    "cr-pep",
    "cr-pep-hyper-delta",
    "cr-pep-hyper-delta/n",
    "dr-pep",
    "dr-pep-hyper-delta",
    "dr-pep-hyper-delta/n",
)

_STUDY1_BETA = {
    "logistic": {
        "null": (0.1, 0.0, 0.0, 0.0, 0.0, 0.0),
        "sparse": (0.1, 0.7, 0.0, 0.0, 0.0, 0.0),
        "medium": (0.1, 1.6, 0.8, -1.5, 0.0, 0.0),
        "full": (0.1, 1.75, 1.5, -1.1, -1.4, 0.5),
    },
    "poisson": {
        "null": (-0.3, 0.0, 0.0, 0.0),
        "sparse": (-0.3, 0.3, 0.0, 0.0),
        "medium": (-0.3, 0.3, 0.2, 0.0),
        "full": (-0.3, 0.3, 0.2, -0.15),
    },
}

_STUDY2_BETA = {
    "null": (0.1,) + (0.0,) * 10,
    "sparse": (0.1, 0.0, 0.0, -0.9, 0.0, 0.0, 0.0, 1.2, 0.0, 0.0, 0.4),
    "dense": (0.1, 0.6, 0.0, -0.9, 0.0, 1.0, 0.9, 1.2, -1.2, -0.5, 0.0),
}

_STUDY2_LOADINGS = np.array([0.3, 0.5, 0.7, 0.9, 1.1])


@dataclass(frozen=True)
class ScenarioSpec:
    """One simulation design; coefficients and sizes follow the study tables."""

    study: int
    family: str = "logistic"
    scenario: str = "null"
    r: float = 0.0
    replications: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.study not in (1, 2):
            raise ConfigurationError("study must be 1 or 2")
        if self.study == 2 and self.family != "logistic":
            raise ConfigurationError("study 2 is logistic only")
        table = _STUDY1_BETA[self.family] if self.study == 1 else _STUDY2_BETA
        if self.scenario not in table:
            raise ConfigurationError(
                f"unknown scenario {self.scenario!r} for study {self.study}"
            )
        if not 0.0 <= self.r < 1.0:
            raise ConfigurationError("correlation parameter must lie in [0, 1)")

    @property
    def n(self) -> int:
        return 100 if self.study == 1 else 200

    @property
    def true_beta(self) -> np.ndarray:
        table = _STUDY1_BETA[self.family] if self.study == 1 else _STUDY2_BETA
        return np.asarray(table[self.scenario])

    @property
    def p(self) -> int:
        return self.true_beta.shape[0] - 1

    @property
    def true_model(self) -> tuple:
        return tuple(int(b != 0.0) for b in self.true_beta[1:])

    @property
    def model_prior_kind(self) -> str:
        return "uniform" if self.study == 1 else "beta-binomial"

    @property
    def glm_kind(self) -> str:
        return "binomial" if self.family == "logistic" else "poisson"


def _dataset_rng(spec: ScenarioSpec, rep_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((spec.seed, rep_index)))


def _simulate_response(spec, X_raw, rng):
    eta = spec.true_beta[0] + X_raw @ spec.true_beta[1:]
    if spec.family == "logistic":
        return rng.binomial(1, expit(eta)).astype(float)
    return rng.poisson(np.exp(eta)).astype(float)


def study1_correlation(p: int, r: float) -> np.ndarray:
    idx = np.arange(p)
    return r ** np.abs(idx[:, None] - idx[None, :])


def gen_study1(spec: ScenarioSpec, rep_index: int) -> Dataset:
    if spec.study != 1:
        raise ConfigurationError("spec is not a study-1 design")
    rng = _dataset_rng(spec, rep_index)
    corr = study1_correlation(spec.p, spec.r)
    # Symmetric square root of the target correlation matrix.
    vals, vecs = np.linalg.eigh(corr)
    root = vecs @ np.diag(np.sqrt(np.maximum(vals, 0.0))) @ vecs.T
    Z = rng.standard_normal((spec.n, spec.p))
    X_raw = Z @ root
    y = _simulate_response(spec, X_raw, rng)
    return build_dataset(y, X_raw)


def gen_study2(spec: ScenarioSpec, rep_index: int) -> Dataset:
    if spec.study != 2:
        raise ConfigurationError("spec is not a study-2 design")
    rng = _dataset_rng(spec, rep_index)
    X_raw = np.empty((spec.n, 10))
    X_raw[:, :5] = rng.standard_normal((spec.n, 5))
    cond_mean = X_raw[:, :5] @ _STUDY2_LOADINGS
    X_raw[:, 5:] = cond_mean[:, None] + rng.standard_normal((spec.n, 5))
    y = _simulate_response(spec, X_raw, rng)
    return build_dataset(y, X_raw)


def generate(spec: ScenarioSpec, rep_index: int) -> Dataset:
    return gen_study1(spec, rep_index) if spec.study == 1 else gen_study2(spec, rep_index)


def make_method_chain(
    method: str,
    dataset: Dataset,
    glm_kind: str,
    model_prior_kind: str,
    iterations: int,
    burn_in: int,
    seed: int,
) -> ChainOutput:
    """Run one of the named prior configurations on a dataset."""
    if method not in METHOD_NAMES:
        raise ConfigurationError(f"unknown method {method!r}")
    family = GlmFamily(glm_kind)
    model_prior = ModelPrior(model_prior_kind, dataset.p)
    base = dict(
        family=family,
        iterations=iterations,
        burn_in=burn_in,
        seed=seed,
        model_prior=model_prior,
    )
    if method.startswith(("cr-pep", "dr-pep")):
        reference = "cr" if method.startswith("cr") else "dr"
        if method.endswith("hyper-delta"):
            dp = DeltaPrior("hyper", a=3.0)
        elif method.endswith("hyper-delta/n"):
            dp = DeltaPrior("hyper-n", a=3.0, n=dataset.n)
        else:
            dp = DeltaPrior("fixed")
        cfg = SamplerConfig(
            reference_mode=reference,
            delta_prior=dp,
            baseline=BaselinePrior("jeffreys"),
            **base,
        )
        return run_chain(cfg, dataset)
    kind = {
        "g-prior": "unit-info-g",
        "hyper-g": "hyper-g",
        "hyper-g/n": "hyper-g-n",
        "mg-hyper-g": "mg-hyper-g",
    }[method]
    cfg = SamplerConfig(baseline=BaselinePrior("flat"), **base)
    return run_gprior_chain(GPriorConfig(kind, a=3.0), cfg, dataset)


def _one_replication(spec, methods, rep_index, iterations, burn_in):
    dataset = generate(spec, rep_index)
    out = {}
    for m_idx, method in enumerate(methods):
        chain_seed = int(
            np.random.SeedSequence((spec.seed, rep_index, 1000 + m_idx)).generate_state(1)[0]
        )
        try:
            chain = make_method_chain(
                method, dataset, spec.glm_kind, spec.model_prior_kind,
                iterations, burn_in, chain_seed,
            )
            summary = summarize(chain, batch_size=max(1, (iterations - burn_in) // 10))
            out[method] = {
                "map_model": summary.map_model,
                "inclusion": summary.inclusion_probs,
                "ok": True,
            }
        except PepGlmError as exc:
            out[method] = {"ok": False, "error": str(exc)}
    return out


def replicate_compare(
    spec: ScenarioSpec,
    methods=METHOD_NAMES,
    iterations: int = 11000,
    burn_in: int = 1000,
    n_jobs: int = 1,
) -> dict:
    """Replicated MAP-recovery comparison across prior configurations.

    Methods share the same dataset within each replication (paired
    design).  Per-replication failures are excluded and counted.
    """
    for method in methods:
        if method not in METHOD_NAMES:
            raise ConfigurationError(f"unknown method {method!r}")
    jobs = (
        delayed(_one_replication)(spec, methods, rep, iterations, burn_in)
        for rep in range(spec.replications)
    )
    results = Parallel(n_jobs=n_jobs)(jobs)

    report = {
        "scenario": {
            "study": spec.study,
            "family": spec.family,
            "scenario": spec.scenario,
            "r": spec.r,
            "replications": spec.replications,
            "true_model": spec.true_model,
        },
        "iterations": iterations,
        "burn_in": burn_in,
        "methods": {},
    }
    for method in methods:
        per_rep = [res[method] for res in results]
        ok = [r for r in per_rep if r["ok"]]
        succ = sum(1 for r in ok if tuple(r["map_model"]) == spec.true_model)
        incl = np.array([r["inclusion"] for r in ok]) if ok else np.empty((0, spec.p))
        quant = {}
        if len(ok):
            for q in (0.0, 0.25, 0.5, 0.75, 1.0):
                quant[q] = np.quantile(incl, q, axis=0).tolist()
        report["methods"][method] = {
            "map_success": succ,
            "runs": len(ok),
            "failures": len(per_rep) - len(ok),
            "map_models": [tuple(r["map_model"]) for r in ok],
            "inclusion": incl,
            "inclusion_quantiles": quant,
        }
    return report
