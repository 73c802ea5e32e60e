"""Vanilla gradient, SmoothGrad and AdaptGrad.

Both smoothers average ``G(x + ε_i)`` over ``N`` Gaussian draws.  Sample
``i`` always comes from stream ``(seed, i)``; samples are evaluated in
fixed blocks and accumulated in ascending sample order, so the result
does not depend on how many workers ran the blocks.  Perturbed inputs
are *not* clipped to the data range.
"""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike

from ..config.defaults import SAMPLE_BLOCK
from ..core.domain import DataRange
from ..core.errors import ConfigError, DomainError
from ..core.model import ModelFunction
from ..core.tensor import as_vector
from ..numerics.sampling import GaussianKernel, RngState, sample_gaussian
from ..numerics.special import confidence_z
from ..workers import blocks, map_ordered
from .base import SaliencyMap, SmootherConfig, SmootherMode

log = logging.getLogger(__name__)


def vanilla_saliency(model: ModelFunction, x: ArrayLike, class_index: int) -> SaliencyMap:
    """G(x) = ∂F_c/∂x wrapped with provenance."""
    grad = model.input_gradient(x, class_index)
    return SaliencyMap(
        grad, "Grad", model.model_id, {"class_index": int(class_index), "smoother": {"mode": "none"}}
    )


def adaptgrad_sigma(x: ArrayLike, data_range: DataRange, confidence: float) -> np.ndarray:
    """Per-dimension σ_i = min(|x_i − x_min|, |x_i − x_max|) / (√2 erfinv((1+c)/2)).

    σ_i is 0 for coordinates sitting on a bound.

    Raises
    ------
    ConfigError:
        If *confidence* is outside (0, 1).
    DomainError:
        If any coordinate lies outside *data_range*.
    """
    if not 0.0 < confidence < 1.0:
        raise ConfigError(f"confidence must lie in (0, 1), got {confidence}")
    x = as_vector(x)
    if not data_range.contains(x):
        raise DomainError(
            f"input leaves the data range [{data_range.x_min}, {data_range.x_max}]"
        )
    distance = np.minimum(np.abs(x - data_range.x_min), np.abs(x - data_range.x_max))
    return distance / confidence_z(confidence)


def smoothing_sigma(
    x: np.ndarray, smoother: SmootherConfig, data_range: DataRange
) -> np.ndarray:
    """σ vector the smoother would sample with at *x*."""
    if smoother.mode is SmootherMode.SMOOTHGRAD:
        return np.full(x.size, smoother.alpha * data_range.width)
    if smoother.mode is SmootherMode.ADAPTGRAD:
        return adaptgrad_sigma(x, data_range, smoother.confidence)
    return np.zeros(x.size)


def monte_carlo_gradient(
    model: ModelFunction,
    x: np.ndarray,
    class_index: int,
    kernel: GaussianKernel,
    n_samples: int,
    seed: int,
) -> np.ndarray:
    """(1/N) Σ_i G(x + ε_i), ε_i drawn from stream ``(seed, i)``.

    A degenerate kernel adds no noise at all, so the plain gradient is
    returned unchanged.
    """
    if kernel.is_degenerate:
        return model.input_gradient(x, class_index)

    def run_block(indices: range) -> np.ndarray:
        noise = np.stack([sample_gaussian(RngState(seed, i), kernel) for i in indices])
        return model.gradient_batch(x + noise, class_index)

    chunks = map_ordered(run_block, blocks(n_samples, SAMPLE_BLOCK))
    total = np.zeros(x.size)
    for chunk in chunks:
        for row in chunk:
            total += row
    return total / n_samples


def smoothed_gradient(
    model: ModelFunction,
    x: ArrayLike,
    class_index: int,
    smoother: SmootherConfig,
    data_range: Optional[DataRange] = None,
) -> np.ndarray:
    """Gradient under *smoother*: plain, SmoothGrad or AdaptGrad."""
    x = as_vector(x, model.input_dim)
    if not smoother.is_smoothing:
        return model.input_gradient(x, class_index)
    if data_range is None:
        raise ConfigError(f"{smoother.mode.value} smoothing needs a data range")
    kernel = GaussianKernel(smoothing_sigma(x, smoother, data_range))
    return monte_carlo_gradient(
        model, x, class_index, kernel, smoother.n_samples, smoother.seed
    )


def _smoothed_map(
    model: ModelFunction,
    x: ArrayLike,
    class_index: int,
    cfg: SmootherConfig,
    data_range: DataRange,
    expected: SmootherMode,
    chain: str,
) -> SaliencyMap:
    if cfg.mode is not expected:
        raise ConfigError(f"{chain} needs a {expected.value} smoother config, got {cfg.mode.value}")
    values = smoothed_gradient(model, x, class_index, cfg, data_range)
    log.debug("%s: N=%d seed=%d", chain, cfg.n_samples, cfg.seed)
    return SaliencyMap(
        values,
        chain,
        model.model_id,
        {"class_index": int(class_index), "smoother": cfg.to_dict(), "range": data_range.to_dict()},
    )


def smoothgrad(
    model: ModelFunction,
    x: ArrayLike,
    class_index: int,
    cfg: SmootherConfig,
    data_range: DataRange,
) -> SaliencyMap:
    """SmoothGrad with isotropic σ = α (x_max − x_min)."""
    return _smoothed_map(model, x, class_index, cfg, data_range, SmootherMode.SMOOTHGRAD, "SG")


def adaptgrad(
    model: ModelFunction,
    x: ArrayLike,
    class_index: int,
    cfg: SmootherConfig,
    data_range: DataRange,
) -> SaliencyMap:
    """AdaptGrad with Σ = diag(σ_i²) from :func:`adaptgrad_sigma`."""
    return _smoothed_map(model, x, class_index, cfg, data_range, SmootherMode.ADAPTGRAD, "AG")
