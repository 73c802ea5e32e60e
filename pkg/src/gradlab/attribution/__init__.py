"""Explanation methods and their compositions."""

from .base import (
    Baseline,
    Explainer,
    IGConfig,
    NoiseGradConfig,
    SaliencyMap,
    SmootherConfig,
    SmootherMode,
)
from .compose import AttributionPipeline, MethodTag, compose, compose_chain, parse_chain
from .methods import gradient_times_input, integrated_gradients
from .noisegrad import noisegrad
from .smoothing import adaptgrad, adaptgrad_sigma, smoothed_gradient, smoothgrad, vanilla_saliency

__all__ = [
    "AttributionPipeline",
    "Baseline",
    "Explainer",
    "IGConfig",
    "MethodTag",
    "NoiseGradConfig",
    "SaliencyMap",
    "SmootherConfig",
    "SmootherMode",
    "adaptgrad",
    "adaptgrad_sigma",
    "compose",
    "compose_chain",
    "gradient_times_input",
    "integrated_gradients",
    "noisegrad",
    "parse_chain",
    "smoothed_gradient",
    "smoothgrad",
    "vanilla_saliency",
]
