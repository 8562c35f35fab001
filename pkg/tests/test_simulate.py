"""Simulation-harness tests: designs, determinism, wiring."""

import numpy as np
import pytest

from pepglm.exceptions import ConfigurationError
from pepglm.simulate import (
    METHOD_NAMES,
    ScenarioSpec,
    gen_study1,
    gen_study2,
    replicate_compare,
    study1_correlation,
)


class TestScenarioSpec:
    def test_study1_sizes(self):
        s = ScenarioSpec(study=1, family="logistic", scenario="sparse")
        assert s.n == 100 and s.p == 5
        sp = ScenarioSpec(study=1, family="poisson", scenario="full")
        assert sp.n == 100 and sp.p == 3

    def test_study2_sizes(self):
        s = ScenarioSpec(study=2, scenario="dense")
        assert s.n == 200 and s.p == 10

    def test_stated_coefficients(self):
        s = ScenarioSpec(study=1, family="logistic", scenario="sparse")
        np.testing.assert_allclose(s.true_beta, [0.1, 0.7, 0, 0, 0, 0])
        d = ScenarioSpec(study=2, scenario="dense")
        np.testing.assert_allclose(
            d.true_beta, [0.1, 0.6, 0, -0.9, 0, 1, 0.9, 1.2, -1.2, -0.5, 0]
        )
        p = ScenarioSpec(study=1, family="poisson", scenario="medium")
        np.testing.assert_allclose(p.true_beta, [-0.3, 0.3, 0.2, 0])

    def test_true_model_indicator(self):
        s = ScenarioSpec(study=2, scenario="sparse")
        assert s.true_model == (0, 0, 1, 0, 0, 0, 1, 0, 0, 1)

    def test_model_prior_wiring(self):
        assert ScenarioSpec(study=1).model_prior_kind == "uniform"
        assert ScenarioSpec(study=2).model_prior_kind == "beta-binomial"

    def test_invalid_r(self):
        with pytest.raises(ConfigurationError):
            ScenarioSpec(study=1, r=1.0)
        with pytest.raises(ConfigurationError):
            ScenarioSpec(study=1, r=-0.1)


class TestStudy1Generation:
    def test_identity_correlation_at_zero(self):
        np.testing.assert_array_equal(study1_correlation(5, 0.0), np.eye(5))

    def test_geometric_correlation(self):
        corr = study1_correlation(5, 0.75)
        assert corr[0, 2] == pytest.approx(0.5625)
        assert corr[1, 2] == pytest.approx(0.75)

    def test_sample_correlation_converges(self):
        spec = ScenarioSpec(study=1, family="logistic", scenario="null",
                            r=0.75, seed=3)
        rows = []
        for rep in range(10):
            ds = gen_study1(spec, rep)
            rows.append(ds.X[:, 1:] + ds.centers)
        pooled = np.vstack(rows)
        emp = np.corrcoef(pooled.T)
        target = study1_correlation(5, 0.75)
        tol = 3.0 / np.sqrt(pooled.shape[0]) * (1 - 0.75 ** 2) + 0.02
        assert np.max(np.abs(emp - target)) < max(tol, 0.06)

    def test_deterministic_per_seed_and_rep(self):
        spec = ScenarioSpec(study=1, scenario="medium", seed=11)
        a = gen_study1(spec, 4)
        b = gen_study1(spec, 4)
        np.testing.assert_array_equal(a.X, b.X)
        np.testing.assert_array_equal(a.y, b.y)
        c = gen_study1(spec, 5)
        assert not np.array_equal(a.y, c.y)

    def test_centered_design(self):
        ds = gen_study1(ScenarioSpec(study=1, scenario="full", r=0.75), 0)
        assert np.max(np.abs(ds.X[:, 1:].mean(axis=0))) < 1e-10

    def test_poisson_responses_valid(self):
        ds = gen_study1(ScenarioSpec(study=1, family="poisson",
                                     scenario="full"), 0)
        assert np.all(ds.y >= 0) and np.all(ds.y == np.floor(ds.y))


class TestStudy2Generation:
    def test_conditional_mean_and_variance(self):
        spec = ScenarioSpec(study=2, scenario="null", seed=5)
        resid = []
        loadings = np.array([0.3, 0.5, 0.7, 0.9, 1.1])
        for rep in range(50):
            ds = gen_study2(spec, rep)
            raw = ds.X[:, 1:] + ds.centers
            cond = raw[:, :5] @ loadings
            resid.append(raw[:, 5:] - cond[:, None])
        resid = np.concatenate(resid, axis=0)
        assert np.max(np.abs(resid.mean(axis=0))) < 0.05
        assert np.max(np.abs(resid.var(axis=0) - 1.0)) < 0.05

    def test_wrong_study_rejected(self):
        with pytest.raises(ConfigurationError):
            gen_study2(ScenarioSpec(study=1), 0)
        with pytest.raises(ConfigurationError):
            gen_study1(ScenarioSpec(study=2), 0)


class TestReplicateCompare:
    def test_smoke_and_pairing(self):
        spec = ScenarioSpec(study=1, family="logistic", scenario="null",
                            replications=2, seed=1)
        report = replicate_compare(
            spec, methods=("g-prior", "cr-pep"), iterations=400, burn_in=100
        )
        for m in ("g-prior", "cr-pep"):
            res = report["methods"][m]
            assert res["runs"] + res["failures"] == 2
            assert 0 <= res["map_success"] <= 2
            assert res["inclusion"].shape == (res["runs"], 5)

    def test_single_replication_count_binary(self):
        spec = ScenarioSpec(study=1, scenario="null", replications=1, seed=2)
        report = replicate_compare(spec, methods=("cr-pep",),
                                   iterations=300, burn_in=50)
        assert report["methods"]["cr-pep"]["map_success"] in (0, 1)

    def test_unknown_method_rejected(self):
        spec = ScenarioSpec(study=1, replications=1)
        with pytest.raises(ConfigurationError):
            replicate_compare(spec, methods=("nonsense",), iterations=100,
                              burn_in=10)

    def test_all_method_names_buildable(self):
        assert len(METHOD_NAMES) == 10
