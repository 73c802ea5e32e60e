"""NoiseGrad: average an attribution over models with perturbed parameters.

Model ``m`` is ``θ · (1 + ξ_m)`` with ξ_m drawn elementwise from stream
``(seed, m)``.  Wrapping SmoothGrad or AdaptGrad gives the S-NG / A-NG
mixups.
"""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike

from ..core.model import ModelFunction
from ..core.tensor import as_vector
from ..numerics.sampling import RngState, perturb_multiplicative
from ..workers import map_ordered
from .base import Explainer, NoiseGradConfig, SaliencyMap
from .smoothing import vanilla_saliency

log = logging.getLogger(__name__)

_CHAIN_NAMES = {"Grad": "NG", "SG": "S-NG", "AG": "A-NG"}


def perturbed_model(model: ModelFunction, cfg: NoiseGradConfig, index: int) -> ModelFunction:
    """The *index*-th perturbed copy of *model*."""
    params = perturb_multiplicative(
        RngState(cfg.seed, index), model.parameters(), float(cfg.relative_sigma)
    )
    return model.with_parameters(params)


def noisegrad(
    model: ModelFunction,
    x: ArrayLike,
    class_index: int,
    cfg: Optional[NoiseGradConfig] = None,
    base: Optional[Explainer] = None,
) -> SaliencyMap:
    """(1/M) Σ_m base(model_m, x, class).

    Parameters
    ----------
    cfg:
        Number of models, relative noise scale and seed.
    base:
        Attribution run on each perturbed model; defaults to the vanilla
        gradient.
    """
    cfg = cfg or NoiseGradConfig()
    base = base or vanilla_saliency
    x = as_vector(x, model.input_dim)

    def explain(index: int) -> SaliencyMap:
        return base(perturbed_model(model, cfg, index), x, class_index)

    maps = map_ordered(explain, range(int(cfg.n_models)))
    total = np.zeros(x.size)
    for m in maps:
        total += m.values
    base_chain = maps[0].method_chain
    chain = _CHAIN_NAMES.get(base_chain, f"NG[{base_chain}]")
    log.debug("%s: M=%d eta=%g", chain, cfg.n_models, cfg.relative_sigma)
    return SaliencyMap(
        total / int(cfg.n_models),
        chain,
        model.model_id,
        {**maps[0].config, "noisegrad": cfg.to_dict()},
    )
