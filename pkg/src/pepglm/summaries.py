"""Posterior summaries and out-of-sample predictive evaluation.

Turns recorded chain draws into inclusion probabilities, the MAP and
median-probability models, estimated model probabilities, shrinkage
statistics, and batched Monte Carlo error estimates; plus predictive
false-negative/false-positive rates on a held-out binary test set.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .dataset import Dataset, build_dataset
from .exceptions import ConfigurationError
from .sampler import ChainOutput, GPriorGvs, PepGvs

__all__ = ["PosteriorSummary", "summarize", "predictive_eval", "half_split"]

SHRINKAGE_QUANTILES = (0.025, 0.25, 0.5, 0.75, 0.975)


@dataclass
class PosteriorSummary:
    inclusion_probs: np.ndarray
    map_model: tuple
    map_visits: int
    mpm_model: tuple
    model_probs: dict
    shrinkage_mean: float
    shrinkage_quantiles: dict
    batch_estimates: np.ndarray
    acceptance_rates: dict


def summarize(chain: ChainOutput, batch_size: int = 1000) -> PosteriorSummary:
    """Post-process one chain.

    Inclusion probabilities are column means of the gamma draws; the MAP
    model is the most-visited indicator (ties broken lexicographically
    smallest); the median-probability model keeps exactly the predictors
    with inclusion probability strictly above one half.  Batch estimates
    come from contiguous equal-size batches; a trailing partial batch is
    dropped with a warning.
    """
    draws = chain.gamma_draws
    if draws.shape[0] == 0:
        raise ConfigurationError("empty chain")
    incl = draws.mean(axis=0)

    best = min(
        chain.visited_models.items(), key=lambda kv: (-kv[1], kv[0])
    )
    mpm = tuple(int(q > 0.5) for q in incl)

    total = draws.shape[0]
    n_batches = total // batch_size
    if n_batches == 0:
        raise ConfigurationError("batch size exceeds the number of draws")
    if total % batch_size:
        warnings.warn(
            f"dropping a partial batch of {total % batch_size} draws",
            stacklevel=2,
        )
    trimmed = draws[: n_batches * batch_size]
    batches = trimmed.reshape(n_batches, batch_size, -1).mean(axis=1)

    scale = chain.delta_draws
    shrink = scale / (1.0 + scale)
    quants = {
        q: float(np.quantile(shrink, q)) for q in SHRINKAGE_QUANTILES
    }

    model_probs = {
        key: count / total for key, count in sorted(chain.visited_models.items())
    }
    return PosteriorSummary(
        inclusion_probs=incl,
        map_model=best[0],
        map_visits=best[1],
        mpm_model=mpm,
        model_probs=model_probs,
        shrinkage_mean=float(shrink.mean()),
        shrinkage_quantiles=quants,
        batch_estimates=batches,
        acceptance_rates=dict(chain.acceptance_rates),
    )


def half_split(dataset: Dataset, seed: int) -> tuple[Dataset, tuple]:
    """Seeded uniform random half-split into a training Dataset and a
    raw test triple (design, response, trials).

    The training half is re-centered; the test design reuses the
    training column means so that fitted coefficients transfer.
    """
    rng = np.random.default_rng(seed)
    n = dataset.n
    perm = rng.permutation(n)
    train_idx = np.sort(perm[: n // 2])
    test_idx = np.sort(perm[n // 2 :])

    raw = dataset.X[:, 1:] + (dataset.centers if dataset.centers is not None else 0.0)
    train = build_dataset(
        dataset.y[train_idx],
        raw[train_idx],
        trials=None if dataset.trials is None else dataset.trials[train_idx],
        names=dataset.names,
    )
    X_test = np.column_stack(
        [np.ones(test_idx.size), raw[test_idx] - train.centers]
    )
    trials_test = None if dataset.trials is None else dataset.trials[test_idx]
    return train, (X_test, dataset.y[test_idx], trials_test)


def predictive_eval(
    train_chain: ChainOutput,
    model: tuple,
    train: Dataset,
    test: tuple,
    n_draws: int = 2000,
    seed: int = 0,
    hard_threshold: bool = False,
) -> tuple[float, float]:
    """False-negative and false-positive percentages on a binary test set.

    Re-runs the chain that produced ``train_chain`` with the inclusion
    vector frozen at ``model``, then simulates one predictive outcome
    per retained coefficient draw and compares it with the observed
    test labels.  Percentages are relative to the full test size.
    ``hard_threshold`` replaces simulation with classification at
    probability one half.
    """
    X_test, y_test, trials_test = test
    if y_test.shape[0] == 0:
        raise ConfigurationError("empty test set")

    cfg = train_chain.config
    if isinstance(cfg, tuple):
        gprior, base = cfg
    else:
        gprior, base = None, cfg
    if base.family.kind != "binomial":
        raise ConfigurationError("predictive evaluation supports binomial data only")
    frozen = replace(
        base,
        fixed_gamma=np.asarray(model, dtype=bool),
        record_beta=True,
        seed=base.seed + 1,
    )
    if gprior is None:
        chain = PepGvs(frozen, train).run()
    else:
        chain = GPriorGvs(gprior, frozen, train).run()

    betas = chain.beta_draws
    take = min(n_draws, betas.shape[0])
    sel = np.linspace(0, betas.shape[0] - 1, take).astype(int)
    cols = np.concatenate(([0], 1 + np.flatnonzero(np.asarray(model, dtype=bool))))
    ntr = np.ones(y_test.shape[0]) if trials_test is None else trials_test

    rng = np.random.default_rng(seed)
    fn = fp = 0.0
    n_test = y_test.shape[0]
    for k in sel:
        eta = X_test[:, cols] @ betas[k][cols]
        prob = 1.0 / (1.0 + np.exp(-eta))
        if hard_threshold:
            pred = (prob > 0.5).astype(float) * ntr
        else:
            pred = rng.binomial(ntr.astype(int), prob).astype(float)
        # Classify per record: positive when successes exceed half the trials.
        obs_pos = y_test > 0.5 * ntr - 1e-12
        pred_pos = pred > 0.5 * ntr - 1e-12
        fn += np.sum(obs_pos & ~pred_pos) / n_test
        fp += np.sum(~obs_pos & pred_pos) / n_test
    return 100.0 * fn / take, 100.0 * fp / take
