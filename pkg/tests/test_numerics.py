"""Tests for special functions, random streams and quadrature."""

import math
import warnings

import numpy as np
import pytest

from gradlab.core.domain import DataRange
from gradlab.core.errors import ConfigError, DomainError, InputShapeError, QuadratureError
from gradlab.core.model import QuadraticModel
from gradlab.numerics.quadrature import (
    gaussian_mass,
    integrate_piecewise,
    quadrature,
    smoothed_gradient_oracle,
)
from gradlab.numerics.sampling import (
    GaussianKernel,
    RngState,
    derive_seed,
    perturb_multiplicative,
    sample_gaussian,
    uniform_box,
)
from gradlab.numerics.special import SQRT2, confidence_z, erf, erfc, erfinv, normal_pdf


class TestSpecial:
    def test_erf_known_values(self):
        assert erf(0.0) == 0.0
        assert erf(1.0) == pytest.approx(0.8427007929497149, abs=1e-15)
        assert erf(-1.0) == pytest.approx(-0.8427007929497149, abs=1e-15)

    def test_erf_array(self):
        out = erf(np.array([-3.0, 0.0, 3.0]))
        assert isinstance(out, np.ndarray)
        assert out[0] == pytest.approx(-out[2])

    def test_erfc_tail_precision(self):
        # 1 - erf(6) underflows to 0 but erfc keeps it
        assert erfc(6.0) == pytest.approx(2.151973671249891e-17, rel=1e-10)

    def test_erfinv_inverts_erf(self):
        for p in (-0.9, -0.2, 0.0, 0.5, 0.975):
            assert erf(erfinv(p)) == pytest.approx(p, abs=1e-14)

    def test_erf_against_reference_grid(self):
        grid = np.arange(-6000, 6001) * 1e-3
        reference = np.array([math.erf(t) for t in grid])
        assert np.max(np.abs(erf(grid) - reference)) <= 1e-7

    def test_erfinv_round_trip_grid(self):
        p = np.linspace(-0.9999, 0.9999, 20_001)
        assert np.max(np.abs(erf(erfinv(p)) - p)) <= 1e-9

    @pytest.mark.parametrize("p", [1.0, -1.0, 1.5, float("nan")])
    def test_erfinv_domain(self, p):
        with pytest.raises(DomainError):
            erfinv(p)

    def test_erf_rejects_nan(self):
        with pytest.raises(DomainError):
            erf(float("nan"))

    def test_confidence_z(self):
        # two-sided 95% of the half-normal mass
        assert confidence_z(0.95) == pytest.approx(SQRT2 * float(erfinv(0.975)))
        assert confidence_z(0.95) == pytest.approx(2.241402727604945, abs=1e-12)

    def test_pdf_mass_over_six_sigma(self):
        mass = gaussian_mass(-6.0, 6.0, 1.0)
        assert mass == pytest.approx(erf(6.0 / SQRT2), abs=1e-12)
        assert normal_pdf(0.0) == pytest.approx(1.0 / math.sqrt(2.0 * math.pi))


class TestRngState:
    def test_same_state_same_draws(self):
        k = GaussianKernel.isotropic(0.3, 5)
        np.testing.assert_array_equal(
            sample_gaussian(RngState(42, 7), k), sample_gaussian(RngState(42, 7), k)
        )

    def test_streams_differ(self):
        k = GaussianKernel.isotropic(1.0, 5)
        a = sample_gaussian(RngState(42, 0), k)
        b = sample_gaussian(RngState(42, 1), k)
        assert not np.array_equal(a, b)

    def test_zero_sigma_dimensions_exact(self):
        k = GaussianKernel(np.array([0.0, 1.0, 0.0]))
        draws = sample_gaussian(RngState(1), k, n_draws=100)
        assert draws.shape == (100, 3)
        assert np.all(draws[:, [0, 2]] == 0.0)
        assert np.any(draws[:, 1] != 0.0)

    def test_length_mismatch(self):
        with pytest.raises(InputShapeError):
            sample_gaussian(RngState(0), GaussianKernel.isotropic(1.0, 3), length=4)

    def test_negative_sigma_rejected(self):
        with pytest.raises(ConfigError):
            GaussianKernel(np.array([0.1, -0.1]))

    def test_moments(self):
        k = GaussianKernel.isotropic(2.0, 1)
        draws = sample_gaussian(RngState(5), k, n_draws=20000)[:, 0]
        assert abs(draws.mean()) < 0.1
        assert draws.std() == pytest.approx(2.0, rel=0.05)

    def test_million_draws_independent(self):
        k = GaussianKernel.isotropic(1.0, 3)
        draws = sample_gaussian(RngState(8), k, n_draws=1_000_000)
        assert np.max(np.abs(draws.mean(axis=0))) <= 0.005
        assert np.all((draws.var(axis=0) >= 0.99) & (draws.var(axis=0) <= 1.01))
        rho = np.corrcoef(draws, rowvar=False)
        assert np.max(np.abs(rho[~np.eye(3, dtype=bool)])) <= 0.01

    def test_derive_seed(self):
        assert derive_seed(3, 1) == derive_seed(3, 1)
        assert derive_seed(3, 1) != derive_seed(3, 2)
        assert derive_seed(3, 1) != derive_seed(4, 1)

    def test_uniform_box_bounds(self):
        u = uniform_box(RngState(9), 0.01, 1000)
        assert u.shape == (1000,)
        assert np.all(np.abs(u) <= 0.01)

    def test_multiplicative_noise(self):
        arrays = [np.ones((3, 2)), np.zeros(4)]
        out = perturb_multiplicative(RngState(0), arrays, 0.1)
        assert out[0].shape == (3, 2)
        assert not np.allclose(out[0], 1.0)
        np.testing.assert_array_equal(out[1], 0.0)


class TestQuadrature:
    def test_polynomial(self):
        assert quadrature(lambda x: x * x, 0.0, 3.0) == pytest.approx(9.0, abs=1e-9)

    def test_bad_bounds(self):
        with pytest.raises(ConfigError):
            quadrature(lambda x: x, 1.0, 1.0)

    def test_failure_reports_estimate(self):
        with pytest.raises(QuadratureError) as exc:
            quadrature(lambda x: 1.0 / math.sqrt(abs(x - 0.5)) if x != 0.5 else 0.0,
                       0.0, 1.0, tol=1e-15, limit=3)
        assert math.isfinite(exc.value.value)

    def test_unrelated_warnings_pass_through(self):
        def noisy(x):
            warnings.warn("unrelated", RuntimeWarning)
            return x

        with pytest.warns(RuntimeWarning, match="unrelated"):
            assert quadrature(noisy, 0.0, 2.0) == pytest.approx(2.0, abs=1e-9)

    def test_piecewise(self):
        total = integrate_piecewise(abs, [-1.0, 0.0, 2.0])
        assert total == pytest.approx(2.5, abs=1e-9)

    def test_piecewise_needs_breakpoints(self):
        with pytest.raises(ConfigError):
            integrate_piecewise(abs, [1.0, 1.0])


class TestOracle:
    def test_matches_sinusoid_closed_form(self, sinusoid):
        for x, sigma in [(0.7, 0.2), (0.0, 0.5), (-1.3, 0.05)]:
            assert smoothed_gradient_oracle(sinusoid, x, sigma) == pytest.approx(
                sinusoid.smoothed_gradient(x, sigma), abs=1e-9
            )

    def test_zero_sigma_is_gradient(self, sinusoid):
        assert smoothed_gradient_oracle(sinusoid, 0.7, 0.0) == sinusoid.input_gradient([0.7], 0)[0]

    @pytest.mark.parametrize("x", [-1.3, 0.0, 0.7])
    def test_tiny_sigma_converges_to_gradient(self, sinusoid, x):
        assert smoothed_gradient_oracle(sinusoid, x, 1e-6) == pytest.approx(
            sinusoid.input_gradient([x], 0)[0], abs=1e-5
        )

    def test_bounded_drops_outside_mass(self):
        model = QuadraticModel.half_norm(1)
        # G(x) = x; on [x, x_max] only the upper half of the kernel survives
        value = smoothed_gradient_oracle(model, 0.0, 1.0, DataRange(0.0, 100.0))
        assert value == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), abs=1e-9)

    def test_needs_one_dimension(self, quadratic_model):
        with pytest.raises(ConfigError):
            smoothed_gradient_oracle(quadratic_model, 0.0, 1.0)
