"""Command-line entry points.

Subcommands:

* ``select``       variable selection on a CSV dataset under one method
* ``simulate``     replicated synthetic-study comparisons
* ``predict``      half-split predictive evaluation of the MAP/MPM models
* ``oracle-check`` compare the sampler with the brute-force oracle on a
                   built-in small fixture

Results are written as line-delimited JSON records plus flat CSV tables
(see ``records`` for the schema).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import records
from .dataset import Dataset, build_dataset
from .datasets import load_csv, load_pima
from .exceptions import ConfigurationError, PepGlmError
from .families import GlmFamily
from .oracle import brute_force_model_posterior
from .priors import BaselinePrior, DeltaPrior, GPriorConfig, ModelPrior
from .sampler import SamplerConfig, run_chain, run_gprior_chain
from .simulate import METHOD_NAMES, ScenarioSpec, make_method_chain, replicate_compare
from .summaries import half_split, predictive_eval, summarize

_G_KINDS = {
    "g-prior": "unit-info-g",
    "hyper-g": "hyper-g",
    "hyper-g/n": "hyper-g-n",
    "mg-hyper-g": "mg-hyper-g",
}


def _add_sampler_flags(parser):
    parser.add_argument("--method", choices=METHOD_NAMES, default=None,
                        help="named prior configuration (overrides the fine-grained flags)")
    parser.add_argument("--family", choices=["binomial", "poisson", "gaussian"],
                        default="binomial")
    parser.add_argument("--iterations", type=int, default=41000)
    parser.add_argument("--burnin", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--delta", choices=["fixed", "hyper", "hyper-n"], default="fixed")
    parser.add_argument("--delta-value", type=float, default=None,
                        help="fixed delta (default: sample size)")
    parser.add_argument("--a", type=float, default=3.0, help="hyper-prior parameter")
    parser.add_argument("--reference", choices=["cr", "dr"], default="cr")
    parser.add_argument("--baseline", choices=["flat", "jeffreys"], default="jeffreys")
    parser.add_argument("--model-prior", choices=["uniform", "betabinomial"],
                        default="uniform")


def _model_prior(name, p):
    return ModelPrior("uniform" if name == "uniform" else "beta-binomial", p)


def _run_configured(args, dataset, record_beta=False, fixed_gamma=None):
    """Build and run the chain selected by the CLI flags; returns
    (method name, chain)."""
    mp = _model_prior(args.model_prior, dataset.p)
    if args.method in _G_KINDS:
        cfg = SamplerConfig(
            family=GlmFamily(args.family),
            iterations=args.iterations,
            burn_in=args.burnin,
            seed=args.seed,
            model_prior=mp,
            record_beta=record_beta,
            fixed_gamma=fixed_gamma,
        )
        chain = run_gprior_chain(GPriorConfig(_G_KINDS[args.method], a=args.a), cfg, dataset)
        return args.method, chain
    if args.method is not None:
        reference = "cr" if args.method.startswith("cr") else "dr"
        if args.method.endswith("hyper-delta"):
            dp = DeltaPrior("hyper", a=args.a)
        elif args.method.endswith("hyper-delta/n"):
            dp = DeltaPrior("hyper-n", a=args.a, n=dataset.n)
        else:
            dp = DeltaPrior("fixed", fixed_value=args.delta_value)
        baseline = BaselinePrior("jeffreys")
        method = args.method
    else:
        reference = args.reference
        if args.delta == "hyper":
            dp = DeltaPrior("hyper", a=args.a)
        elif args.delta == "hyper-n":
            dp = DeltaPrior("hyper-n", a=args.a, n=dataset.n)
        else:
            dp = DeltaPrior("fixed", fixed_value=args.delta_value)
        baseline = BaselinePrior(args.baseline)
        method = f"{reference}-pep[{args.delta}]"
    cfg = SamplerConfig(
        family=GlmFamily(args.family),
        iterations=args.iterations,
        burn_in=args.burnin,
        seed=args.seed,
        reference_mode=reference,
        delta_prior=dp,
        baseline=baseline,
        model_prior=mp,
        record_beta=record_beta,
        fixed_gamma=fixed_gamma,
    )
    return method, run_chain(cfg, dataset)


def _load_dataset(args) -> Dataset:
    if args.data == "pima":
        return load_pima()
    return load_csv(args.data, args.response, args.trials)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_select(args) -> int:
    dataset = _load_dataset(args)
    method, chain = _run_configured(args, dataset)
    batch = 1000 if chain.n_draws >= 1000 else max(1, chain.n_draws // 10)
    summary = summarize(chain, batch_size=batch)
    out = _out_dir(args)

    cfg = chain.config[1] if isinstance(chain.config, tuple) else chain.config
    rec = records.summary_record(method, dataset, cfg, summary, chain.diagnostics)
    records.dump_records([rec], out / "summary.jsonl")

    emit = set(args.emit.split(",")) if args.emit else set()
    if "traces" in emit:
        with open(out / "traces.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", "gamma", "delta"])
            for i in range(chain.n_draws):
                bits = "".join(str(int(b)) for b in chain.gamma_draws[i])
                w.writerow([i, bits, repr(float(chain.delta_draws[i]))])
    if "boxplot-data" in emit:
        with open(out / "batches.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["predictor"] + [f"batch{i}" for i in
                                        range(summary.batch_estimates.shape[0])])
            for j, name in enumerate(dataset.names):
                w.writerow([name] + [repr(float(v)) for v in
                                     summary.batch_estimates[:, j]])

    print(f"method={method} n={dataset.n} p={dataset.p}")
    for name, q in zip(dataset.names, summary.inclusion_probs):
        print(f"  {name}: {q:.3f}")
    print(f"  MAP={summary.map_model} MPM={summary.mpm_model} "
          f"shrinkage={summary.shrinkage_mean:.3f}")
    return 0


def cmd_simulate(args) -> int:
    replications = 100 if args.full_scale else args.replications
    iterations = 41000 if args.full_scale else args.iterations
    burn_in = 1000 if args.full_scale else args.burnin
    methods = args.methods.split(",") if args.methods else list(METHOD_NAMES)
    for m in methods:
        if m not in METHOD_NAMES:
            raise ConfigurationError(f"unknown method {m!r}")
    scenarios = args.scenarios.split(",") if args.scenarios else None
    if scenarios is None:
        scenarios = ["null", "sparse", "medium", "full"] if args.study == 1 else \
                    ["null", "sparse", "dense"]
    out = _out_dir(args)

    all_records = []
    table_rows = []
    for scenario in scenarios:
        for r in [float(v) for v in args.r.split(",")]:
            spec = ScenarioSpec(
                study=args.study,
                family=args.family if args.study == 1 else "logistic",
                scenario=scenario,
                r=r,
                replications=replications,
                seed=args.seed,
            )
            report = replicate_compare(spec, methods, iterations=iterations,
                                       burn_in=burn_in, n_jobs=args.jobs)
            all_records.extend(records.replication_records(report))
            row = {"scenario": scenario, "r": r}
            for m in methods:
                row[m] = report["methods"][m]["map_success"]
            table_rows.append(row)
            print(f"study {args.study} {scenario} r={r}: " +
                  " ".join(f"{m}={report['methods'][m]['map_success']}/{report['methods'][m]['runs']}"
                           for m in methods))

    records.dump_records(all_records, out / "replications.jsonl")
    with open(out / "map_success.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scenario", "r"] + methods)
        for row in table_rows:
            w.writerow([row["scenario"], row["r"]] + [row[m] for m in methods])
    return 0


def cmd_predict(args) -> int:
    dataset = _load_dataset(args)
    if args.family != "binomial":
        raise ConfigurationError("predictive evaluation supports binomial data only")
    train, test = half_split(dataset, args.split_seed)
    method, chain = _run_configured(args, train)
    batch = 1000 if chain.n_draws >= 1000 else max(1, chain.n_draws // 10)
    summary = summarize(chain, batch_size=batch)
    out = _out_dir(args)
    results = {}
    for label, model in (("MAP", summary.map_model), ("MPM", summary.mpm_model)):
        fn, fp = predictive_eval(chain, model, train, test,
                                 n_draws=args.ndraws, seed=args.seed,
                                 hard_threshold=args.hard_threshold)
        results[label] = {"model": list(model), "false_neg_pct": fn,
                          "false_pos_pct": fp}
        print(f"{label} model {model}: false-neg {fn:.1f}%  false-pos {fp:.1f}%")
    payload = {
        "schema_version": records.SCHEMA_VERSION,
        "record": "prediction",
        "method": method,
        "split_seed": args.split_seed,
        "n_train": int(train.n),
        "n_test": int(test[1].shape[0]),
        "results": results,
    }
    with open(out / "prediction.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
    return 0


def cmd_oracle_check(args) -> int:
    rng = np.random.default_rng(7)
    n = 10
    x = rng.standard_normal(n)
    y = (rng.random(n) < 0.5).astype(float)
    dataset = build_dataset(y, x[:, None])
    family = GlmFamily("binomial")
    cfg = SamplerConfig(
        family=family,
        iterations=args.iterations,
        burn_in=1000,
        seed=args.seed,
        reference_mode="cr",
        delta_prior=DeltaPrior("fixed", fixed_value=10.0),
        baseline=BaselinePrior("flat"),
    )
    chain = run_chain(cfg, dataset)
    summary = summarize(chain, batch_size=max(1, chain.n_draws // 10))
    exact = brute_force_model_posterior(
        dataset, family, reference="cr", baseline=BaselinePrior("flat"), delta=10.0
    )
    worst = 0.0
    for mask, prob in exact.items():
        est = summary.model_probs.get(mask, 0.0)
        worst = max(worst, abs(est - prob))
        print(f"model {mask}: chain={est:.4f} oracle={prob:.4f}")
    print(f"max abs deviation: {worst:.4f}")
    return 0 if worst <= args.tolerance else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pepglm",
        description="Variable selection for GLMs with power-expected-posterior priors",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sel = sub.add_parser("select", help="run variable selection on a CSV dataset")
    p_sel.add_argument("--data", required=True,
                       help="CSV path, or 'pima' for the bundled benchmark")
    p_sel.add_argument("--response", default="type")
    p_sel.add_argument("--trials", default=None)
    _add_sampler_flags(p_sel)
    p_sel.add_argument("--emit", default="summary",
                       help="comma list from: summary,traces,boxplot-data")
    p_sel.add_argument("--out", default="pepglm-out")
    p_sel.set_defaults(func=cmd_select)

    p_sim = sub.add_parser("simulate", help="replicated synthetic comparisons")
    p_sim.add_argument("--study", type=int, choices=[1, 2], default=1)
    p_sim.add_argument("--family", choices=["logistic", "poisson"], default="logistic")
    p_sim.add_argument("--scenarios", default=None,
                       help="comma list (default: all for the study)")
    p_sim.add_argument("--r", default="0.0", help="comma list of correlation values")
    p_sim.add_argument("--methods", default=None,
                       help="comma list (default: all ten)")
    p_sim.add_argument("--replications", type=int, default=20)
    p_sim.add_argument("--iterations", type=int, default=11000)
    p_sim.add_argument("--burnin", type=int, default=1000)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--full-scale", action="store_true",
                       help="100 replications x 41000 iterations")
    p_sim.add_argument("--jobs", type=int, default=1)
    p_sim.add_argument("--out", default="pepglm-out")
    p_sim.set_defaults(func=cmd_simulate)

    p_pred = sub.add_parser("predict", help="half-split predictive evaluation")
    p_pred.add_argument("--data", required=True)
    p_pred.add_argument("--response", default="type")
    p_pred.add_argument("--trials", default=None)
    _add_sampler_flags(p_pred)
    p_pred.add_argument("--split-seed", type=int, default=11)
    p_pred.add_argument("--ndraws", type=int, default=2000)
    p_pred.add_argument("--hard-threshold", action="store_true")
    p_pred.add_argument("--out", default="pepglm-out")
    p_pred.set_defaults(func=cmd_predict)

    p_oc = sub.add_parser("oracle-check",
                          help="compare the chain with the brute-force oracle")
    p_oc.add_argument("--iterations", type=int, default=200000)
    p_oc.add_argument("--seed", type=int, default=0)
    p_oc.add_argument("--tolerance", type=float, default=0.03)
    p_oc.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PepGlmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
