"""Variable selection for generalized linear models under
power-expected-posterior priors, with g-prior comparators, a Gibbs
variable-selection sampler, brute-force oracles, and an experiment
harness.
"""

from .dataset import Dataset, build_dataset
from .datasets import load_csv, load_pima
from .estimators import GPriorGvsSelector, PepGvsSelector
from .families import (
    FitResult,
    GlmFamily,
    binomial,
    gaussian,
    irls_fit,
    log_likelihood,
    observed_information,
    poisson,
)
from .laplace import gaussian_log_marginal_exact, laplace_log_marginal
from .oracle import brute_force_gprior_posterior, brute_force_model_posterior
from .priors import (
    BaselinePrior,
    DeltaPrior,
    GPriorConfig,
    ModelPrior,
    log_baseline_prior,
    log_delta_prior,
    log_gprior_density,
    log_model_prior,
)
from .sampler import (
    ChainOutput,
    GPriorGvs,
    PepGvs,
    PseudoPrior,
    SamplerConfig,
    SamplerState,
    init_state,
    run_chain,
    run_gprior_chain,
)
from .simulate import METHOD_NAMES, ScenarioSpec, gen_study1, gen_study2, replicate_compare
from .summaries import PosteriorSummary, half_split, predictive_eval, summarize

__version__ = "0.1.0"

__all__ = [
    "BaselinePrior",
    "ChainOutput",
    "Dataset",
    "DeltaPrior",
    "FitResult",
    "GPriorConfig",
    "GPriorGvs",
    "GPriorGvsSelector",
    "GlmFamily",
    "METHOD_NAMES",
    "ModelPrior",
    "PepGvs",
    "PepGvsSelector",
    "PosteriorSummary",
    "PseudoPrior",
    "SamplerConfig",
    "SamplerState",
    "ScenarioSpec",
    "binomial",
    "brute_force_gprior_posterior",
    "brute_force_model_posterior",
    "build_dataset",
    "gaussian",
    "gaussian_log_marginal_exact",
    "gen_study1",
    "gen_study2",
    "half_split",
    "init_state",
    "irls_fit",
    "laplace_log_marginal",
    "load_csv",
    "load_pima",
    "log_baseline_prior",
    "log_delta_prior",
    "log_gprior_density",
    "log_likelihood",
    "log_model_prior",
    "observed_information",
    "poisson",
    "predictive_eval",
    "replicate_compare",
    "run_chain",
    "run_gprior_chain",
    "summarize",
]
