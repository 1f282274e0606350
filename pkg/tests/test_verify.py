import math

import numpy as np
import pytest

from betadel.constants import Family, ModelParams, ParameterError
from betadel.tessellation import default_window
from betadel.verify import (MCReport, identity_test_factorization,
                            identity_test_higher_dim, limit_test_classical,
                            limit_test_gaussian, moment_test,
                            tessellation_vs_theory, two_sample_report)


def beta(b=0.0, nu=0.0, gamma=1.0):
    return ModelParams(Family.Beta, 3, b, nu=nu, gamma=gamma)


class TestMomentTest:
    def test_small_run_passes(self):
        r = moment_test(beta(0.0), 1.0, 5000, seed=3)
        assert r.verdict == "Pass"
        assert abs(r.estimate - r.closed_form) <= 3 * r.std_error + 1e-12
        assert r.z_score == pytest.approx(
            (r.estimate - r.closed_form) / r.std_error)

    def test_s_zero_exact(self):
        r = moment_test(beta(2.0), 0.0, 10, seed=1)
        assert r.verdict == "Pass" and r.estimate == 1.0

    def test_beta_prime_range_refusal(self):
        p = ModelParams(Family.BetaPrime, 3, 4.0, nu=1.0)
        with pytest.raises(ParameterError):
            moment_test(p, 2.0, 100, seed=1)  # needs 2s < 2b-d-nu

    def test_deterministic_given_seed(self):
        a = moment_test(beta(1.0), 1.0, 2000, seed=5)
        b = moment_test(beta(1.0), 1.0, 2000, seed=5)
        assert a.estimate == b.estimate and a.std_error == b.std_error

    def test_report_serializable(self):
        d = moment_test(beta(0.0), 1.0, 500, seed=9).to_dict()
        assert {"quantity", "verdict", "z_score"} <= set(d)


class TestTwoSample:
    def test_same_distribution_passes(self):
        rng = np.random.default_rng(0)
        r = two_sample_report("x", rng.normal(size=4000),
                              rng.normal(size=4000), seed=0)
        assert r.verdict == "Pass" and abs(r.z_score) < 3

    def test_shifted_fails(self):
        rng = np.random.default_rng(1)
        r = two_sample_report("x", rng.normal(size=4000),
                              rng.normal(size=4000) + 0.5, seed=0)
        assert r.verdict == "Fail"


class TestIdentities:
    def test_factorization_small(self):
        reports = identity_test_factorization(beta(0.0), [1.0], 4000, seed=11)
        assert all(r.verdict == "Pass" for r in reports)
        ks = [r for r in reports if "p_value" in r.details]
        assert ks and all(r.details["p_value"] > 0.01 for r in ks)

    def test_factorization_validity_guard(self):
        with pytest.raises(ParameterError):
            identity_test_factorization(beta(0.0, nu=0.0), [-0.6], 100,
                                        seed=1)

    def test_higher_dim_small(self):
        r = identity_test_higher_dim(beta(1.0, nu=1.0), 4000, seed=13)
        assert isinstance(r, MCReport)
        assert r.verdict == "Pass" and r.details["ks_p_value"] > 0.01


class TestLimits:
    def test_classical_limit_small(self):
        p = beta(-0.99)
        r = limit_test_classical(p, 20_000, seed=17)
        assert r.verdict == "Pass"

    def test_classical_rejects_far_beta(self):
        with pytest.raises(ParameterError):
            limit_test_classical(beta(0.0), 100, seed=1)

    def test_gaussian_limit_small(self):
        reports = limit_test_gaussian(3, 0.0, [10.0, 100.0], 20_000, seed=19)
        assert all(r.verdict == "Pass" for r in reports)
        disc = [r for r in reports if "discrepancy" in r.quantity
                or "discrepancy" in str(r.details)]
        assert len(reports) >= 2


class TestTessellationHarness:
    def test_small_replica_run(self):
        p = beta(0.0, gamma=1.0)
        w = default_window(p, [(0, 8), (0, 8)])
        reports = tessellation_vs_theory(p, w, replicas=4, seed=23)
        names = [r.quantity for r in reports]
        assert len(reports) >= 4
        normal = [r for r in reports if "normal" in r.quantity.lower()]
        assert normal and normal[0].verdict == "Pass"
        for r in reports:
            assert r.verdict in ("Pass", "Fail", "Inconclusive")
