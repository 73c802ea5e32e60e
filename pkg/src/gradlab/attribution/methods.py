"""Gradient×Input and Integrated Gradients, optionally smoothed.

Both methods take a :class:`SmootherConfig`.  With a SmoothGrad or
AdaptGrad smoother every gradient they use is replaced by the smoothed
gradient, which gives the S-GI / A-GI / S-IG / A-IG variants.
"""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike

from ..core.domain import DataRange
from ..core.errors import ConfigError
from ..core.model import ModelFunction
from ..core.tensor import as_vector
from ..numerics.sampling import derive_seed
from .base import Baseline, IGConfig, SaliencyMap, SmootherConfig
from .smoothing import smoothed_gradient

log = logging.getLogger(__name__)


def _provenance(
    class_index: int,
    smoother: SmootherConfig,
    data_range: Optional[DataRange],
    **extra,
) -> dict:
    config = {"class_index": int(class_index), "smoother": smoother.to_dict()}
    if data_range is not None:
        config["range"] = data_range.to_dict()
    config.update(extra)
    return config


def gradient_times_input(
    model: ModelFunction,
    x: ArrayLike,
    class_index: int,
    smoother: Optional[SmootherConfig] = None,
    data_range: Optional[DataRange] = None,
) -> SaliencyMap:
    """Elementwise ``x ⊙ G(x)`` with G plain or smoothed.

    Parameters
    ----------
    smoother:
        ``None`` or a NONE-mode config gives GI; SmoothGrad / AdaptGrad
        configs give S-GI / A-GI and then need *data_range*.
    """
    smoother = smoother or SmootherConfig.none()
    x = as_vector(x, model.input_dim)
    grad = smoothed_gradient(model, x, class_index, smoother, data_range)
    return SaliencyMap(
        x * grad,
        f"{smoother.mode.prefix}GI",
        model.model_id,
        _provenance(class_index, smoother, data_range),
    )


def integrated_gradients(
    model: ModelFunction,
    x: ArrayLike,
    class_index: int,
    cfg: Optional[IGConfig] = None,
    smoother: Optional[SmootherConfig] = None,
    data_range: Optional[DataRange] = None,
) -> SaliencyMap:
    """Integrated gradients along the straight path from the baseline.

    ``IG_i = (x_i − x′_i) · (1/m) Σ_k ∂F/∂x_i(x′ + (k − ½)/m · (x − x′))``
    for ``k = 1..m``.  Black and white baselines come from *data_range*;
    without a range the black baseline is the zero vector.

    With a smoothing config, the gradient at path point ``k`` is the
    smoothed gradient drawn with seed ``derive_seed(seed, k)``.

    Raises
    ------
    ConfigError:
        For a white baseline without a data range, for an
        invalid custom baseline, or for smoothing without a data range.
    """
    cfg = cfg or IGConfig()
    smoother = smoother or SmootherConfig.none()
    x = as_vector(x, model.input_dim)

    if data_range is not None:
        baseline = cfg.baseline_vector(x.size, data_range)
    elif cfg.baseline is Baseline.BLACK:
        baseline = np.zeros(x.size)
    elif cfg.baseline is Baseline.CUSTOM and cfg.custom.size == x.size:
        baseline = np.array(cfg.custom)
    else:
        raise ConfigError(f"{cfg.tag} needs a data range to build its baseline")

    steps = int(cfg.steps)
    delta = x - baseline
    alphas = (np.arange(1, steps + 1) - 0.5) / steps
    path = baseline + alphas[:, None] * delta

    if smoother.is_smoothing:
        total = np.zeros(x.size)
        for k, point in enumerate(path, start=1):
            step_cfg = smoother.with_seed(derive_seed(smoother.seed, k))
            total += smoothed_gradient(model, point, class_index, step_cfg, data_range)
        mean_grad = total / steps
    else:
        grads = model.gradient_batch(path, class_index)
        total = np.zeros(x.size)
        for row in grads:
            total += row
        mean_grad = total / steps

    log.debug("%s%s: %d steps", smoother.mode.prefix, cfg.tag, steps)
    return SaliencyMap(
        delta * mean_grad,
        f"{smoother.mode.prefix}{cfg.tag}",
        model.model_id,
        _provenance(class_index, smoother, data_range, ig=cfg.to_dict()),
    )
