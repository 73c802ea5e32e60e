"""Assemble attribution pipelines from smoother and method tags.

A pipeline is named by its method chain: the smoother prefix (``S-`` or
``A-``) followed by the method (``GI``, ``IG(B)``, ``IG(W)``, ``NG``).
Smoothing the plain gradient is spelled ``SG`` / ``AG`` rather than
``S-Grad`` / ``A-Grad``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Optional

from numpy.typing import ArrayLike

from ..config.defaults import DEFAULT_IG_STEPS, DEFAULT_SAMPLES
from ..core.domain import DataRange
from ..core.errors import ConfigError
from ..core.model import ModelFunction
from .base import Baseline, IGConfig, NoiseGradConfig, SaliencyMap, SmootherConfig, SmootherMode
from .methods import gradient_times_input, integrated_gradients
from .noisegrad import noisegrad
from .smoothing import adaptgrad, smoothgrad, vanilla_saliency

log = logging.getLogger(__name__)


class MethodTag(Enum):
    GRAD = "Grad"
    GI = "GI"
    IG_BLACK = "IG(B)"
    IG_WHITE = "IG(W)"
    NG = "NG"

    @classmethod
    def parse(cls, tag: str) -> "MethodTag":
        for member in cls:
            if member.value.lower() == tag.strip().lower():
                return member
        raise ConfigError(
            f"unknown method tag {tag!r}; expected one of {[m.value for m in cls]}"
        )


_SMOOTHER_TAGS = {
    "none": SmootherMode.NONE,
    "": SmootherMode.NONE,
    "sg": SmootherMode.SMOOTHGRAD,
    "ag": SmootherMode.ADAPTGRAD,
}


def parse_smoother(tag: str) -> SmootherMode:
    try:
        return _SMOOTHER_TAGS[tag.strip().lower()]
    except KeyError:
        raise ConfigError(
            f"unknown smoother tag {tag!r}; expected none, SG or AG"
        ) from None


def chain_name(mode: SmootherMode, method: MethodTag) -> str:
    """Method-chain descriptor such as ``A-IG(B)`` or ``SG``."""
    if method is MethodTag.GRAD:
        return {SmootherMode.NONE: "Grad", SmootherMode.SMOOTHGRAD: "SG",
                SmootherMode.ADAPTGRAD: "AG"}[mode]
    return f"{mode.prefix}{method.value}"


def parse_chain(chain: str) -> tuple[SmootherMode, MethodTag]:
    """Inverse of :func:`chain_name`."""
    text = chain.strip()
    upper = text.upper()
    if upper in ("SG", "AG"):
        return parse_smoother(upper), MethodTag.GRAD
    if upper.startswith("S-"):
        return SmootherMode.SMOOTHGRAD, MethodTag.parse(text[2:])
    if upper.startswith("A-"):
        return SmootherMode.ADAPTGRAD, MethodTag.parse(text[2:])
    return SmootherMode.NONE, MethodTag.parse(text)


@dataclass(frozen=True)
class AttributionPipeline:
    """A configured explainer: ``pipeline(model, x, class_index)``."""

    smoother: SmootherConfig
    method: MethodTag
    data_range: Optional[DataRange] = None
    ig_steps: int = DEFAULT_IG_STEPS
    noisegrad: NoiseGradConfig = field(default_factory=NoiseGradConfig)

    def __post_init__(self) -> None:
        if self.smoother.is_smoothing and self.data_range is None:
            raise ConfigError(f"{self.method_chain} needs a data range")
        if self.method is MethodTag.IG_WHITE and self.data_range is None:
            raise ConfigError("IG(W) needs a data range")

    @property
    def method_chain(self) -> str:
        return chain_name(self.smoother.mode, self.method)

    def with_range(self, data_range: DataRange) -> "AttributionPipeline":
        """Same pipeline on another data range (e.g. a shifted dataset)."""
        return replace(self, data_range=data_range)

    def with_seed(self, seed: int) -> "AttributionPipeline":
        return replace(
            self,
            smoother=self.smoother.with_seed(seed),
            noisegrad=replace(self.noisegrad, seed=seed),
        )

    def _smoothed(self, model: ModelFunction, x: ArrayLike, class_index: int) -> SaliencyMap:
        if self.smoother.mode is SmootherMode.SMOOTHGRAD:
            return smoothgrad(model, x, class_index, self.smoother, self.data_range)
        if self.smoother.mode is SmootherMode.ADAPTGRAD:
            return adaptgrad(model, x, class_index, self.smoother, self.data_range)
        return vanilla_saliency(model, x, class_index)

    def __call__(self, model: ModelFunction, x: ArrayLike, class_index: int) -> SaliencyMap:
        if self.method is MethodTag.GRAD:
            return self._smoothed(model, x, class_index)
        if self.method is MethodTag.GI:
            return gradient_times_input(model, x, class_index, self.smoother, self.data_range)
        if self.method is MethodTag.NG:
            return noisegrad(model, x, class_index, self.noisegrad, base=self._smoothed)
        baseline = Baseline.BLACK if self.method is MethodTag.IG_BLACK else Baseline.WHITE
        return integrated_gradients(
            model,
            x,
            class_index,
            IGConfig(steps=self.ig_steps, baseline=baseline),
            self.smoother,
            self.data_range,
        )

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"method_chain": self.method_chain, "smoother": self.smoother.to_dict()}
        if self.data_range is not None:
            d["range"] = self.data_range.to_dict()
        if self.method in (MethodTag.IG_BLACK, MethodTag.IG_WHITE):
            d["ig_steps"] = int(self.ig_steps)
        if self.method is MethodTag.NG:
            d["noisegrad"] = self.noisegrad.to_dict()
        return d


def compose(
    smoother_tag: str,
    method_tag: str,
    *,
    data_range: Optional[DataRange] = None,
    n_samples: int = DEFAULT_SAMPLES,
    alpha: Optional[float] = None,
    confidence: Optional[float] = None,
    seed: int = 0,
    ig_steps: int = DEFAULT_IG_STEPS,
    noisegrad_cfg: Optional[NoiseGradConfig] = None,
) -> AttributionPipeline:
    """Build the pipeline for ``(smoother_tag, method_tag)``.

    ``compose("AG", "Grad")`` is AdaptGrad, ``compose("SG", "NG")`` is
    S-NG and ``compose("none", "GI")`` is plain Gradient×Input.

    Raises
    ------
    ConfigError:
        Unknown tags, or smoothing parameters that do not match the
        smoother.
    """
    mode = parse_smoother(smoother_tag)
    method = MethodTag.parse(method_tag)
    if mode is SmootherMode.SMOOTHGRAD:
        if confidence is not None:
            raise ConfigError("the SG smoother takes alpha, not a confidence level")
        smoother = SmootherConfig(mode, n_samples=n_samples, alpha=alpha, seed=seed)
    elif mode is SmootherMode.ADAPTGRAD:
        if alpha is not None:
            raise ConfigError("the AG smoother takes a confidence level, not alpha")
        smoother = SmootherConfig(mode, n_samples=n_samples, confidence=confidence, seed=seed)
    else:
        smoother = SmootherConfig.none()
    pipeline = AttributionPipeline(
        smoother=smoother,
        method=method,
        data_range=data_range,
        ig_steps=int(ig_steps),
        noisegrad=noisegrad_cfg or NoiseGradConfig(seed=seed),
    )
    log.debug("composed %s", pipeline.method_chain)
    return pipeline


def compose_chain(chain: str, **kwargs: Any) -> AttributionPipeline:
    """:func:`compose` from a chain name such as ``"A-IG(B)"``."""
    mode, method = parse_chain(chain)
    return compose(mode.value, method.value, **kwargs)


__all__ = [
    "AttributionPipeline",
    "MethodTag",
    "chain_name",
    "compose",
    "compose_chain",
    "parse_chain",
    "parse_smoother",
]
