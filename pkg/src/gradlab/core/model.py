"""Differentiable models: layered MLP plus analytic test models.

Every model is a stack of ``(weights, bias)`` layers.  For the MLP the
layers are the affine maps between ReLU activations; the analytic kinds
reuse the same container for their coefficients so that checkpoints and
parameter perturbation work uniformly:

=============  ===================  ===================================
kind           layer                F(x)
=============  ===================  ===================================
mlp            (W_l, b_l) per layer logits of ReLU network
linear         W (C, D), b (C,)     W x + b
quadratic      a (1, D), b (1,)     ½ Σ a_i x_i² + b
sinusoid1d     k (1, 1), b (1,)     sin(k x) + b
=============  ===================  ===================================

Models are immutable; ``forward`` and ``input_gradient`` are pure and
may be called from many threads at once.
"""

from __future__ import annotations

import hashlib
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import ClassVar, NamedTuple, Sequence

import numpy as np
from numpy.typing import ArrayLike

from .errors import ClassIndexError, ConfigError, NumericError
from .tensor import as_batch, as_vector, frozen

log = logging.getLogger(__name__)


class ModelKind(Enum):
    MLP = "mlp"
    LINEAR = "linear"
    QUADRATIC = "quadratic"
    SINUSOID1D = "sinusoid1d"


class Layer(NamedTuple):
    """Affine parameters; ``weights`` has shape ``(out, in)``."""

    weights: np.ndarray
    bias: np.ndarray

    @property
    def out_dim(self) -> int:
        return int(self.weights.shape[0])

    @property
    def in_dim(self) -> int:
        return int(self.weights.shape[1])


def _freeze_layers(layers: Sequence[Sequence[ArrayLike]]) -> tuple[Layer, ...]:
    out = []
    for i, (w, b) in enumerate(layers):
        w = np.asarray(w, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64).reshape(-1)
        if w.ndim != 2:
            raise ConfigError(f"layer {i}: weights must be 2-D, got {w.shape}")
        if b.shape != (w.shape[0],):
            raise ConfigError(
                f"layer {i}: bias shape {b.shape} does not match "
                f"{w.shape[0]} outputs"
            )
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ConfigError(f"layer {i}: parameters must be finite")
        out.append(Layer(frozen(w), frozen(b)))
    if not out:
        raise ConfigError("a model needs at least one layer")
    return tuple(out)


@dataclass(frozen=True, eq=False)
class ModelFunction(ABC):
    """A differentiable function F(x; θ): R^D → R^C."""

    layers: tuple[Layer, ...]

    kind: ClassVar[ModelKind]

    def __post_init__(self) -> None:
        object.__setattr__(self, "layers", _freeze_layers(self.layers))
        self._validate()

    def _validate(self) -> None:
        if len(self.layers) != 1:
            raise ConfigError(f"{self.kind.value} model takes exactly one layer")

    # ------------------------------------------------------------------
    # Shape
    # ------------------------------------------------------------------

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------

    def forward(self, x: ArrayLike) -> np.ndarray:
        """Class scores F(x), shape ``(C,)``."""
        x = as_vector(x, self.input_dim)
        return self._forward_batch(x.reshape(1, -1))[0]

    def forward_batch(self, X: ArrayLike) -> np.ndarray:
        """Class scores for each row of *X*, shape ``(n, C)``."""
        return self._forward_batch(as_batch(X, self.input_dim))

    def input_gradient(self, x: ArrayLike, class_index: int) -> np.ndarray:
        """∂F_c/∂x at *x*, shape ``(D,)``."""
        x = as_vector(x, self.input_dim)
        return self.gradient_batch(x.reshape(1, -1), class_index)[0]

    def gradient_batch(self, X: ArrayLike, class_index: int) -> np.ndarray:
        """∂F_c/∂x for each row of *X*, shape ``(n, D)``."""
        c = self._check_class(class_index)
        grads = self._gradient_batch(as_batch(X, self.input_dim), c)
        if not np.all(np.isfinite(grads)):
            raise NumericError(f"non-finite gradient from {self.kind.value} model")
        return grads

    def predict(self, x: ArrayLike) -> int:
        """Index of the largest class score."""
        return int(np.argmax(self.forward(x)))

    def _check_class(self, class_index: int) -> int:
        c = int(class_index)
        if not 0 <= c < self.output_dim:
            raise ClassIndexError(
                f"class index {class_index} out of range for "
                f"{self.output_dim} outputs"
            )
        return c

    @abstractmethod
    def _forward_batch(self, X: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def _gradient_batch(self, X: np.ndarray, c: int) -> np.ndarray: ...

    # ------------------------------------------------------------------
    # Parameters
    # ------------------------------------------------------------------

    def parameters(self) -> list[np.ndarray]:
        """Parameter arrays in layer order: W_0, b_0, W_1, b_1, ..."""
        params: list[np.ndarray] = []
        for layer in self.layers:
            params.extend((layer.weights, layer.bias))
        return params

    def with_parameters(self, params: Sequence[ArrayLike]) -> "ModelFunction":
        """Same kind and shapes, new parameter values."""
        if len(params) != 2 * len(self.layers):
            raise ConfigError(
                f"expected {2 * len(self.layers)} parameter arrays, got {len(params)}"
            )
        layers = []
        for i, layer in enumerate(self.layers):
            w = np.asarray(params[2 * i], dtype=np.float64)
            b = np.asarray(params[2 * i + 1], dtype=np.float64)
            if w.shape != layer.weights.shape or b.shape != layer.bias.shape:
                raise ConfigError(f"layer {i}: parameter shape changed")
            layers.append((w, b))
        return type(self)(layers=tuple(layers))

    def shift_compensated(self, shift: float) -> "ModelFunction":
        """Model that sees inputs ``x + shift`` exactly as this one sees ``x``.

        The first-layer bias becomes ``b - W @ (shift * 1)``.
        """
        raise ConfigError(f"{self.kind.value} model has no input bias to compensate")

    @property
    def model_id(self) -> str:
        """Short content hash of kind and parameters."""
        h = hashlib.sha256(self.kind.value.encode())
        for p in self.parameters():
            h.update(np.asarray(p.shape, dtype="<u8").tobytes())
            h.update(np.ascontiguousarray(p, dtype="<f8").tobytes())
        return f"{self.kind.value}-{h.hexdigest()[:12]}"


def _compensate_first_layer(model: ModelFunction, shift: float) -> tuple:
    first = model.layers[0]
    offset = first.weights @ np.full(first.in_dim, float(shift))
    return ((first.weights, first.bias - offset),) + model.layers[1:]


# ----------------------------------------------------------------------
# Multilayer perceptron
# ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MLP(ModelFunction):
    """ReLU network; explanations use the pre-softmax logits."""

    kind: ClassVar[ModelKind] = ModelKind.MLP

    def _validate(self) -> None:
        for i in range(1, len(self.layers)):
            if self.layers[i].in_dim != self.layers[i - 1].out_dim:
                raise ConfigError(
                    f"layer {i} expects {self.layers[i].in_dim} inputs but "
                    f"layer {i - 1} produces {self.layers[i - 1].out_dim}"
                )

    @property
    def layer_dims(self) -> list[int]:
        return [self.input_dim] + [layer.out_dim for layer in self.layers]

    def activations(self, X: np.ndarray) -> list[np.ndarray]:
        """Pre-activations of every layer (the last entry is the logits)."""
        pre: list[np.ndarray] = []
        h = X
        last = len(self.layers) - 1
        for i, layer in enumerate(self.layers):
            z = h @ layer.weights.T + layer.bias
            pre.append(z)
            h = np.maximum(z, 0.0) if i < last else z
        return pre

    def _forward_batch(self, X: np.ndarray) -> np.ndarray:
        return self.activations(X)[-1]

    def _gradient_batch(self, X: np.ndarray, c: int) -> np.ndarray:
        pre = self.activations(X)
        # Seed with the row of the output layer for class c
        g = np.broadcast_to(self.layers[-1].weights[c], (X.shape[0], self.layers[-1].in_dim))
        for i in range(len(self.layers) - 2, -1, -1):
            g = (g * (pre[i] > 0.0)) @ self.layers[i].weights
        return np.array(g, dtype=np.float64)

    def shift_compensated(self, shift: float) -> "MLP":
        return MLP(layers=_compensate_first_layer(self, shift))

    @classmethod
    def initialize(cls, dims: Sequence[int], rng: np.random.Generator) -> "MLP":
        """Uniform ``[-1/√fan_in, +1/√fan_in]`` initialization.

        Parameters
        ----------
        dims:
            Layer widths including input and output, e.g. ``[784, 200, 10]``.
        rng:
            Seeded generator; consumed in layer order (W then b).
        """
        dims = [int(d) for d in dims]
        if len(dims) < 2 or any(d < 1 for d in dims):
            raise ConfigError(f"invalid layer dimensions {dims}")
        layers = []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
            b = rng.uniform(-bound, bound, size=fan_out)
            layers.append((w, b))
        log.debug("Initialized MLP %s", dims)
        return cls(layers=tuple(layers))


# ----------------------------------------------------------------------
# Analytic models
# ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LinearModel(ModelFunction):
    """F(x) = W x + b; the gradient is the weight row, independent of x."""

    kind: ClassVar[ModelKind] = ModelKind.LINEAR

    @classmethod
    def from_weights(cls, weights: ArrayLike, bias: ArrayLike = 0.0) -> "LinearModel":
        w = np.atleast_2d(np.asarray(weights, dtype=np.float64))
        b = np.broadcast_to(np.asarray(bias, dtype=np.float64), (w.shape[0],))
        return cls(layers=((w, b),))

    def _forward_batch(self, X: np.ndarray) -> np.ndarray:
        layer = self.layers[0]
        return X @ layer.weights.T + layer.bias

    def _gradient_batch(self, X: np.ndarray, c: int) -> np.ndarray:
        return np.tile(self.layers[0].weights[c], (X.shape[0], 1))

    def shift_compensated(self, shift: float) -> "LinearModel":
        return LinearModel(layers=_compensate_first_layer(self, shift))


@dataclass(frozen=True, eq=False)
class QuadraticModel(ModelFunction):
    """F(x) = ½ Σ a_i x_i² + b, gradient a ⊙ x."""

    kind: ClassVar[ModelKind] = ModelKind.QUADRATIC

    def _validate(self) -> None:
        super()._validate()
        if self.layers[0].out_dim != 1:
            raise ConfigError("quadratic model has a single output")

    @classmethod
    def from_coefficients(
        cls, coefficients: ArrayLike, offset: float = 0.0
    ) -> "QuadraticModel":
        a = np.asarray(coefficients, dtype=np.float64).reshape(1, -1)
        return cls(layers=((a, [offset]),))

    @classmethod
    def half_norm(cls, dim: int) -> "QuadraticModel":
        """F(x) = ½‖x‖²."""
        return cls.from_coefficients(np.ones(dim))

    def _forward_batch(self, X: np.ndarray) -> np.ndarray:
        a, b = self.layers[0]
        return 0.5 * (X * X) @ a.T + b

    def _gradient_batch(self, X: np.ndarray, c: int) -> np.ndarray:
        return X * self.layers[0].weights[0]


@dataclass(frozen=True, eq=False)
class Sinusoid1D(ModelFunction):
    """F(x) = sin(k x) + b on a single input.

    Gaussian smoothing of its gradient has the closed form
    ``k cos(k x) exp(-k² σ² / 2)`` on an unbounded domain.
    """

    kind: ClassVar[ModelKind] = ModelKind.SINUSOID1D

    def _validate(self) -> None:
        super()._validate()
        if self.layers[0].weights.shape != (1, 1):
            raise ConfigError("sinusoid1d model has one input and one output")

    @classmethod
    def from_frequency(cls, k: float, offset: float = 0.0) -> "Sinusoid1D":
        return cls(layers=(([[k]], [offset]),))

    @property
    def frequency(self) -> float:
        return float(self.layers[0].weights[0, 0])

    def _forward_batch(self, X: np.ndarray) -> np.ndarray:
        return np.sin(self.frequency * X) + self.layers[0].bias

    def _gradient_batch(self, X: np.ndarray, c: int) -> np.ndarray:
        k = self.frequency
        return k * np.cos(k * X)

    def smoothed_gradient(self, x: float, sigma: float) -> float:
        """Closed-form Gaussian-smoothed gradient (unbounded domain)."""
        k = self.frequency
        return float(k * np.cos(k * x) * np.exp(-0.5 * k * k * sigma * sigma))


MODEL_CLASSES: dict[ModelKind, type[ModelFunction]] = {
    ModelKind.MLP: MLP,
    ModelKind.LINEAR: LinearModel,
    ModelKind.QUADRATIC: QuadraticModel,
    ModelKind.SINUSOID1D: Sinusoid1D,
}


def build_model(kind: ModelKind, layers: Sequence[Sequence[ArrayLike]]) -> ModelFunction:
    """Construct a model of *kind* from raw layer arrays."""
    return MODEL_CLASSES[kind](layers=tuple(layers))
