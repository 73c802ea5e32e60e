"""Tests for models, gradients and the data range."""

import numpy as np
import pytest

from gradlab.core.domain import DataRange
from gradlab.core.errors import ClassIndexError, ConfigError, InputShapeError, NumericError
from gradlab.core.model import MLP, LinearModel, ModelKind, QuadraticModel, Sinusoid1D, build_model


def _finite_difference(model, x, c, h=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (model.forward(x + e)[c] - model.forward(x - e)[c]) / (2 * h)
    return g


class TestDataRange:
    def test_width_and_midpoint(self, imagenet_range):
        assert imagenet_range.width == pytest.approx(4.76)
        assert imagenet_range.midpoint == pytest.approx(0.26)

    def test_rejects_empty_range(self):
        with pytest.raises(ConfigError):
            DataRange(1.0, 1.0)

    def test_rejects_infinite_bound(self):
        with pytest.raises(ConfigError):
            DataRange(0.0, float("inf"))

    def test_contains_includes_bounds(self, unit_range):
        assert unit_range.contains([0.0, 0.5, 1.0])
        assert not unit_range.contains([0.5, 1.0000001])

    def test_shifted(self, unit_range):
        shifted = unit_range.shifted(1.0)
        assert (shifted.x_min, shifted.x_max) == (1.0, 2.0)


class TestLinearModel:
    def test_gradient_is_weight_row(self, linear_model):
        g = linear_model.input_gradient([0.3, -0.1, 2.0], 1)
        np.testing.assert_array_equal(g, [0.0, 3.0, -1.0])

    def test_forward(self, linear_model):
        out = linear_model.forward([1.0, 1.0, 1.0])
        np.testing.assert_allclose(out, [-0.4, 1.8])

    def test_wrong_length_rejected(self, linear_model):
        with pytest.raises(InputShapeError):
            linear_model.input_gradient([1.0, 2.0], 0)

    def test_class_out_of_range(self, linear_model):
        with pytest.raises(ClassIndexError):
            linear_model.input_gradient([1.0, 2.0, 3.0], 2)

    def test_nan_input_rejected(self, linear_model):
        with pytest.raises(ConfigError):
            linear_model.forward([1.0, float("nan"), 0.0])


class TestQuadraticModel:
    def test_gradient_equals_input(self, quadratic_model):
        x = np.array([0.1, -0.4, 2.0, 0.0])
        np.testing.assert_allclose(quadratic_model.input_gradient(x, 0), x)

    def test_single_output_only(self):
        with pytest.raises(ConfigError):
            QuadraticModel(layers=((np.ones((2, 3)), np.zeros(2)),))


class TestSinusoid:
    def test_gradient(self, sinusoid):
        assert sinusoid.input_gradient([0.7], 0)[0] == pytest.approx(3.0 * np.cos(2.1))

    def test_closed_form_smoothing_at_zero_sigma(self, sinusoid):
        assert sinusoid.smoothed_gradient(0.7, 0.0) == pytest.approx(3.0 * np.cos(2.1))

    def test_closed_form_damping(self, sinusoid):
        ratio = sinusoid.smoothed_gradient(0.7, 0.2) / sinusoid.smoothed_gradient(0.7, 0.0)
        assert ratio == pytest.approx(np.exp(-0.5 * 9.0 * 0.04))


class TestMLP:
    def test_gradient_matches_finite_difference(self, small_mlp):
        x = np.array([0.2, -0.3, 0.8, 0.5])
        for c in range(3):
            np.testing.assert_allclose(
                small_mlp.input_gradient(x, c), _finite_difference(small_mlp, x, c), atol=1e-6
            )

    def test_batch_matches_single(self, small_mlp):
        X = np.array([[0.1, 0.2, 0.3, 0.4], [-1.0, 0.5, 0.0, 2.0]])
        batch = small_mlp.gradient_batch(X, 1)
        for row, x in zip(batch, X):
            np.testing.assert_allclose(row, small_mlp.input_gradient(x, 1), rtol=1e-12, atol=1e-15)

    def test_batch_repeatable(self, small_mlp):
        X = np.random.default_rng(3).normal(size=(64, 4))
        np.testing.assert_array_equal(
            small_mlp.gradient_batch(X, 2), small_mlp.gradient_batch(X.copy(), 2)
        )

    def test_backprop_matches_finite_difference_random(self):
        rng = np.random.default_rng(2024)
        checked = 0
        while checked < 100:
            dims = [int(rng.integers(2, 9)), int(rng.integers(2, 12)), int(rng.integers(2, 6))]
            model = MLP.initialize(dims, rng)
            x = rng.uniform(-1.0, 1.0, size=dims[0])
            # Central differences straddling a ReLU kink are not the derivative
            if np.min(np.abs(model.activations(x[None, :])[0])) < 1e-4:
                continue
            c = int(rng.integers(dims[-1]))
            g = model.input_gradient(x, c)
            fd = _finite_difference(model, x, c)
            np.testing.assert_allclose(fd, g, rtol=1e-5, atol=1e-8 + 1e-5 * np.max(np.abs(g)))
            checked += 1

    def test_layer_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            MLP(layers=((np.ones((3, 2)), np.zeros(3)), (np.ones((2, 4)), np.zeros(2))))

    def test_parameters_are_read_only(self, small_mlp):
        w = small_mlp.parameters()[0]
        with pytest.raises(ValueError):
            w[0, 0] = 1.0

    def test_with_parameters_keeps_shapes(self, small_mlp):
        doubled = small_mlp.with_parameters([2.0 * p for p in small_mlp.parameters()])
        assert isinstance(doubled, MLP)
        assert doubled.model_id != small_mlp.model_id
        with pytest.raises(ConfigError):
            small_mlp.with_parameters(small_mlp.parameters()[:2])

    def test_shift_compensation_is_exact(self, small_mlp):
        shifted = small_mlp.shift_compensated(1.0)
        x = np.array([0.2, 0.9, 0.1, 0.4])
        np.testing.assert_allclose(shifted.forward(x + 1.0), small_mlp.forward(x), atol=1e-12)
        np.testing.assert_allclose(
            shifted.input_gradient(x + 1.0, 2), small_mlp.input_gradient(x, 2), atol=1e-12
        )

    def test_non_finite_parameters_rejected(self):
        with pytest.raises(ConfigError):
            LinearModel.from_weights([[np.inf, 1.0]])

    def test_overflowing_gradient_raises(self):
        model = MLP(layers=(([[1e200]], [1.0]), ([[1e200]], [0.0])))
        with pytest.raises(NumericError):
            model.input_gradient([1.0], 0)


class TestModelId:
    def test_same_parameters_same_id(self, linear_model):
        copy = build_model(ModelKind.LINEAR, [tuple(linear_model.parameters())])
        assert copy.model_id == linear_model.model_id

    def test_kind_in_id(self, sinusoid):
        assert sinusoid.model_id.startswith("sinusoid1d-")
        assert isinstance(sinusoid, Sinusoid1D)
