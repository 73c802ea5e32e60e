"""Tests for the Monte Carlo convergence study."""

import math

import pytest

from gradlab.analysis.convergence import convergence_study, fit_loglog
from gradlab.attribution import SmootherConfig
from gradlab.core.errors import ConfigError


class TestFitLogLog:
    def test_exact_power_law(self):
        ns = [10, 100, 1000]
        slope, intercept = fit_loglog(ns, [2.0 / math.sqrt(n) for n in ns])
        assert slope == pytest.approx(-0.5)
        assert intercept == pytest.approx(math.log(2.0))


class TestConvergenceStudy:
    @pytest.fixture(scope="class")
    def result(self):
        return convergence_study(sample_counts=(10, 40, 160, 640), n_seeds=24, seed=0)

    def test_oracle_and_sigma(self, result):
        assert result.sigma == pytest.approx(0.2)
        assert result.oracle == pytest.approx(
            3.0 * math.cos(2.1) * math.exp(-0.5 * 9.0 * 0.04), abs=1e-9
        )

    def test_rmse_falls_as_inverse_sqrt(self, result):
        assert -0.65 <= result.slope <= -0.35
        rmses = [p.rmse for p in result.points]
        assert rmses[-1] < rmses[0]

    def test_estimate_within_standard_errors(self, result):
        assert result.within_standard_errors(3.0)

    def test_rows(self, result):
        rows = result.as_rows()
        assert [r[0] for r in rows] == [10, 40, 160, 640]
        assert all(r[4] == result.oracle for r in rows)

    def test_adaptgrad(self):
        result = convergence_study(
            SmootherConfig.adaptgrad(0.95), sample_counts=(20, 320), n_seeds=8, seed=1
        )
        assert result.method == "ag"
        # x = 0.7 on [-1, 1] sits 0.3 from the upper bound
        assert result.sigma == pytest.approx(0.3 / 2.241402727604945)

    def test_needs_smoothing(self):
        with pytest.raises(ConfigError):
            convergence_study(SmootherConfig.none())

    def test_needs_two_counts(self):
        with pytest.raises(ConfigError):
            convergence_study(sample_counts=(10,))

    def test_needs_two_seeds(self):
        with pytest.raises(ConfigError):
            convergence_study(n_seeds=1)
