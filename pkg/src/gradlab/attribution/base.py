"""Attribution data structures: configs and the saliency map."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Optional

import numpy as np
from numpy.typing import ArrayLike

from ..config.defaults import (
    DEFAULT_ALPHA,
    DEFAULT_CONFIDENCE,
    DEFAULT_IG_STEPS,
    DEFAULT_NG_MODELS,
    DEFAULT_NG_SIGMA,
    DEFAULT_SAMPLES,
)
from ..core.domain import DataRange
from ..core.errors import ConfigError, NumericError
from ..core.model import ModelFunction
from ..core.tensor import as_vector, frozen


class SmootherMode(Enum):
    NONE = "none"
    SMOOTHGRAD = "sg"
    ADAPTGRAD = "ag"

    @property
    def prefix(self) -> str:
        """Method-chain prefix: ``S-`` / ``A-`` / none."""
        return {"none": "", "sg": "S-", "ag": "A-"}[self.value]


@dataclass(frozen=True)
class SmootherConfig:
    """Sampling setup for gradient smoothing.

    ``alpha`` is only meaningful for SmoothGrad and ``confidence`` only
    for AdaptGrad; leaving the relevant one unset picks the default.
    """

    mode: SmootherMode = SmootherMode.NONE
    n_samples: int = DEFAULT_SAMPLES
    alpha: Optional[float] = None
    confidence: Optional[float] = None
    seed: int = 0

    def __post_init__(self) -> None:
        if int(self.n_samples) < 1:
            raise ConfigError(f"n_samples must be >= 1, got {self.n_samples}")
        object.__setattr__(self, "n_samples", int(self.n_samples))
        object.__setattr__(self, "seed", int(self.seed))

        if self.mode is SmootherMode.SMOOTHGRAD:
            if self.confidence is not None:
                raise ConfigError("SmoothGrad takes alpha, not a confidence level")
            alpha = DEFAULT_ALPHA if self.alpha is None else float(self.alpha)
            if not alpha > 0:
                raise ConfigError(f"alpha must be > 0, got {alpha}")
            object.__setattr__(self, "alpha", alpha)
        elif self.mode is SmootherMode.ADAPTGRAD:
            if self.alpha is not None:
                raise ConfigError("AdaptGrad takes a confidence level, not alpha")
            c = DEFAULT_CONFIDENCE if self.confidence is None else float(self.confidence)
            if not 0.0 < c < 1.0:
                raise ConfigError(f"confidence must lie in (0, 1), got {c}")
            object.__setattr__(self, "confidence", c)
        elif self.alpha is not None or self.confidence is not None:
            raise ConfigError("an unsmoothed config takes neither alpha nor confidence")

    @classmethod
    def none(cls) -> "SmootherConfig":
        return cls(SmootherMode.NONE)

    @classmethod
    def smoothgrad(
        cls, alpha: float = DEFAULT_ALPHA, n_samples: int = DEFAULT_SAMPLES, seed: int = 0
    ) -> "SmootherConfig":
        return cls(SmootherMode.SMOOTHGRAD, n_samples=n_samples, alpha=alpha, seed=seed)

    @classmethod
    def adaptgrad(
        cls,
        confidence: float = DEFAULT_CONFIDENCE,
        n_samples: int = DEFAULT_SAMPLES,
        seed: int = 0,
    ) -> "SmootherConfig":
        return cls(
            SmootherMode.ADAPTGRAD, n_samples=n_samples, confidence=confidence, seed=seed
        )

    @property
    def is_smoothing(self) -> bool:
        return self.mode is not SmootherMode.NONE

    def with_seed(self, seed: int) -> "SmootherConfig":
        return SmootherConfig(self.mode, self.n_samples, self.alpha, self.confidence, seed)

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"mode": self.mode.value}
        if self.is_smoothing:
            d["n_samples"] = self.n_samples
            d["seed"] = self.seed
        if self.alpha is not None:
            d["alpha"] = self.alpha
        if self.confidence is not None:
            d["confidence"] = self.confidence
        return d


@dataclass(frozen=True)
class NoiseGradConfig:
    """Multiplicative Gaussian noise θ·(1 + ξ), ξ ~ N(0, η²), over M models."""

    n_models: int = DEFAULT_NG_MODELS
    relative_sigma: float = DEFAULT_NG_SIGMA
    seed: int = 0

    def __post_init__(self) -> None:
        if int(self.n_models) < 1:
            raise ConfigError(f"n_models must be >= 1, got {self.n_models}")
        if not float(self.relative_sigma) > 0:
            raise ConfigError(f"relative_sigma must be > 0, got {self.relative_sigma}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_models": int(self.n_models),
            "relative_sigma": float(self.relative_sigma),
            "seed": int(self.seed),
        }


class Baseline(Enum):
    BLACK = "black"
    WHITE = "white"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class IGConfig:
    """Integrated-gradients path setup (midpoint Riemann sum)."""

    steps: int = DEFAULT_IG_STEPS
    baseline: Baseline = Baseline.BLACK
    custom: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if int(self.steps) < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if (self.baseline is Baseline.CUSTOM) != (self.custom is not None):
            raise ConfigError("a custom baseline tensor goes with Baseline.CUSTOM only")
        if self.custom is not None:
            object.__setattr__(self, "custom", frozen(as_vector(self.custom, name="baseline")))

    def baseline_vector(self, dim: int, data_range: DataRange) -> np.ndarray:
        """x′: all ``x_min`` (black), all ``x_max`` (white) or the custom tensor."""
        if self.baseline is Baseline.BLACK:
            return np.full(dim, data_range.x_min)
        if self.baseline is Baseline.WHITE:
            return np.full(dim, data_range.x_max)
        if self.custom.size != dim:
            raise ConfigError(f"custom baseline has {self.custom.size} values, expected {dim}")
        if not data_range.contains(self.custom):
            raise ConfigError("custom baseline lies outside the data range")
        return np.array(self.custom)

    @property
    def tag(self) -> str:
        return {"black": "IG(B)", "white": "IG(W)", "custom": "IG(C)"}[self.baseline.value]

    def to_dict(self) -> dict[str, Any]:
        return {"steps": int(self.steps), "baseline": self.baseline.value}


@dataclass(frozen=True, eq=False)
class SaliencyMap:
    """A D-dimensional attribution with provenance."""

    values: np.ndarray
    method_chain: str
    model_id: str
    config: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(values)):
            raise NumericError(f"{self.method_chain}: saliency map is not finite")
        object.__setattr__(self, "values", frozen(values))

    def __len__(self) -> int:
        return int(self.values.size)

    def to_dict(self) -> dict[str, Any]:
        return {
            "method_chain": self.method_chain,
            "model_id": self.model_id,
            "config": self.config,
        }


# (model, x, class_index) -> SaliencyMap
Explainer = Callable[[ModelFunction, ArrayLike, int], SaliencyMap]
