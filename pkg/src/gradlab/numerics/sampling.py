"""Deterministic Gaussian sampling from counter-based random streams.

Each ``(seed, stream_index)`` pair keys its own Philox generator, so a
Monte Carlo sample drawn with ``stream_index = i`` is the same no matter
which worker draws it or in which order.  Normals come from numpy's
``Generator.standard_normal`` (ziggurat), fixed for a given numpy
release.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike

from ..core.errors import ConfigError, InputShapeError
from ..core.tensor import frozen

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngState:
    """Value-type handle on one random stream."""

    seed: int
    stream_index: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "stream_index", int(self.stream_index))

    def generator(self) -> np.random.Generator:
        key = ((self.stream_index & _MASK64) << 64) | (self.seed & _MASK64)
        return np.random.Generator(np.random.Philox(key=key))


def derive_seed(seed: int, *keys: int) -> int:
    """Child seed for a sub-computation identified by *keys*."""
    entropy = [int(seed) & _MASK64] + [int(k) & _MASK64 for k in keys]
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


@dataclass(frozen=True, eq=False)
class GaussianKernel:
    """Diagonal Gaussian N(0, diag(σ²)); a zero σ is a point mass."""

    sigma_vector: np.ndarray

    def __post_init__(self) -> None:
        sigma = np.asarray(self.sigma_vector, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(sigma)):
            raise ConfigError("kernel standard deviations must be finite")
        if np.any(sigma < 0.0):
            raise ConfigError("kernel standard deviations must be >= 0")
        object.__setattr__(self, "sigma_vector", frozen(sigma))

    @classmethod
    def isotropic(cls, sigma: float, dim: int) -> "GaussianKernel":
        return cls(np.full(int(dim), float(sigma)))

    @property
    def dim(self) -> int:
        return int(self.sigma_vector.size)

    @property
    def is_degenerate(self) -> bool:
        """True when every dimension is a point mass."""
        return not np.any(self.sigma_vector > 0.0)


def sample_gaussian(
    rng: RngState,
    kernel: GaussianKernel,
    length: Optional[int] = None,
    n_draws: Optional[int] = None,
) -> np.ndarray:
    """Draw ε ~ N(0, diag(σ²)) from the stream *rng*.

    Parameters
    ----------
    rng:
        Stream to draw from; identical states give identical vectors.
    kernel:
        Per-dimension standard deviations.
    length:
        Requested vector length; must equal ``kernel.dim`` when given.
    n_draws:
        When given, return ``(n_draws, D)`` consecutive draws from the
        same stream instead of a single ``(D,)`` vector.

    Dimensions with σ = 0 are exactly 0.
    """
    if length is not None and int(length) != kernel.dim:
        raise InputShapeError(
            f"kernel has {kernel.dim} dimensions, {length} requested"
        )
    shape = (kernel.dim,) if n_draws is None else (int(n_draws), kernel.dim)
    noise = rng.generator().standard_normal(shape) * kernel.sigma_vector
    noise[..., kernel.sigma_vector == 0.0] = 0.0
    return noise


def perturb_multiplicative(
    rng: RngState,
    arrays: list[np.ndarray],
    relative_sigma: float,
) -> list[np.ndarray]:
    """Return ``a * (1 + ξ)`` for each array, ξ ~ N(0, η²) elementwise.

    Arrays consume the stream in order.
    """
    gen = rng.generator()
    return [a * (1.0 + relative_sigma * gen.standard_normal(a.shape)) for a in arrays]


def uniform_box(rng: RngState, half_width: float, shape: ArrayLike) -> np.ndarray:
    """Uniform draws in ``[-half_width, half_width]``."""
    return rng.generator().uniform(-half_width, half_width, size=tuple(np.atleast_1d(shape)))
