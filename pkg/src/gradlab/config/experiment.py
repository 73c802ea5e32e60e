"""Per-invocation experiment record and render options.

An :class:`ExperimentConfig` is built once from the command line,
validated before any work starts and written verbatim into every
artifact the command produces.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

from ..core.domain import DataRange
from ..core.errors import ConfigError
from .defaults import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_EPOCHS,
    DEFAULT_HIDDEN_UNITS,
    DEFAULT_IG_STEPS,
    DEFAULT_LEARNING_RATE,
    DEFAULT_NG_MODELS,
    DEFAULT_NG_SIGMA,
    DEFAULT_SAMPLES,
    INVARIANCE_SHIFT,
)

COMMANDS = (
    "train",
    "saliency",
    "render",
    "noise-report",
    "convergence",
    "metrics",
    "invariance",
    "oob-rate",
)

METHODS = ("grad", "sg", "ag", "gi", "ig", "ng")
SMOOTHERS = ("none", "sg", "ag")
CHANNEL_REDUCTIONS = ("abs_sum",)
IMAGE_FORMATS = ("pgm",)


@dataclass(frozen=True)
class RenderOptions:
    """Grayscale rendering of a saliency map."""

    percentile_clip: float = 99.0
    channel_reduce: str = "abs_sum"
    fmt: str = "pgm"

    def __post_init__(self) -> None:
        if not 0.0 < float(self.percentile_clip) <= 100.0:
            raise ConfigError(
                f"percentile clip must lie in (0, 100], got {self.percentile_clip}"
            )
        if self.channel_reduce not in CHANNEL_REDUCTIONS:
            raise ConfigError(f"unknown channel reduction {self.channel_reduce!r}")
        if self.fmt not in IMAGE_FORMATS:
            raise ConfigError(f"unsupported image format {self.fmt!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "percentile_clip": float(self.percentile_clip),
            "channel_reduce": self.channel_reduce,
            "fmt": self.fmt,
        }


@dataclass(frozen=True)
class ExperimentConfig:
    """Every parameter a subcommand may use; unused ones stay ``None``."""

    command: str
    seed: int = 0
    out: Optional[Path] = None

    # Inputs
    model: Optional[Path] = None
    data_images: Optional[Path] = None
    data_labels: Optional[Path] = None
    test_images: Optional[Path] = None
    test_labels: Optional[Path] = None
    saliency: Optional[Path] = None
    index: int = 0
    n_inputs: Optional[int] = None

    # Attribution
    method: str = "grad"
    smoother: str = "none"
    methods: tuple[str, ...] = ()
    alpha: Optional[float] = None
    confidence: Optional[float] = None
    n: int = DEFAULT_SAMPLES
    ig_baseline: str = "black"
    ig_steps: int = DEFAULT_IG_STEPS
    ng_models: int = DEFAULT_NG_MODELS
    ng_sigma: float = DEFAULT_NG_SIGMA

    # Data range override
    xmin: Optional[float] = None
    xmax: Optional[float] = None

    # Training
    epochs: int = DEFAULT_EPOCHS
    learning_rate: float = DEFAULT_LEARNING_RATE
    batch_size: int = DEFAULT_BATCH_SIZE
    hidden_units: int = DEFAULT_HIDDEN_UNITS

    # Render
    clip_percentile: float = 99.0
    width: Optional[int] = None
    height: Optional[int] = None

    # Noise report / convergence / invariance
    sweep: bool = False
    sample_counts: tuple[int, ...] = field(default=())
    n_seeds: int = 32
    shift: float = INVARIANCE_SHIFT
    retrain: bool = False

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")

    # ------------------------------------------------------------------

    @property
    def data_range(self) -> Optional[DataRange]:
        """Explicit ``--xmin/--xmax`` range, or ``None``."""
        if self.xmin is None and self.xmax is None:
            return None
        if self.xmin is None or self.xmax is None:
            raise ConfigError("--xmin and --xmax must be given together")
        return DataRange(self.xmin, self.xmax)

    @property
    def render_options(self) -> RenderOptions:
        return RenderOptions(percentile_clip=self.clip_percentile)

    def pipeline_tags(self, method: Optional[str] = None) -> tuple[str, str]:
        """``(smoother_tag, method_tag)`` for :func:`compose`.

        ``sg`` and ``ag`` are shorthands for the smoothed plain gradient;
        the other methods combine with ``--smoother``.  An entry of a
        ``--methods`` list passed as *method* keeps its own smoother, so
        ``--methods grad,sg,ag --smoother ag`` yields A-Grad, SG and AG.
        """
        explicit = method is not None
        method = (method or self.method).lower()
        if method not in METHODS:
            raise ConfigError(f"unknown method {method!r}; expected one of {METHODS}")
        if method in ("sg", "ag"):
            if not explicit and self.smoother not in ("none", method):
                raise ConfigError(f"--method {method} conflicts with --smoother {self.smoother}")
            return method, "Grad"
        tag = {
            "grad": "Grad",
            "gi": "GI",
            "ng": "NG",
            "ig": "IG(W)" if self.ig_baseline == "white" else "IG(B)",
        }[method]
        return self.smoother, tag

    def validate(self) -> "ExperimentConfig":
        """Check cross-field requirements of :attr:`command`.

        Raises
        ------
        ConfigError:
            For any missing or inconsistent parameter.
        """
        def need(*names: str) -> None:
            missing = [n for n in names if getattr(self, n) is None]
            if missing:
                flags = ", ".join("--" + n.replace("_", "-") for n in missing)
                raise ConfigError(f"{self.command} requires {flags}")

        if self.smoother not in SMOOTHERS:
            raise ConfigError(f"unknown smoother {self.smoother!r}")
        if self.ig_baseline not in ("black", "white"):
            raise ConfigError(f"unknown IG baseline {self.ig_baseline!r}")
        if self.n < 1:
            raise ConfigError("--n must be >= 1")
        if self.alpha is not None and self.confidence is not None:
            raise ConfigError("--alpha and --confidence are mutually exclusive")
        _ = self.data_range

        if self.command == "train":
            need("data_images", "data_labels", "out")
        elif self.command == "saliency":
            need("model", "data_images", "data_labels", "out")
            self.pipeline_tags()
        elif self.command == "render":
            need("saliency", "out")
        elif self.command == "noise-report":
            need("out")
            if not self.sweep:
                self._check_noise_method()
        elif self.command == "convergence":
            need("out")
            if any(n < 1 for n in self.sample_counts):
                raise ConfigError("sample counts must be >= 1")
            if self.n_seeds < 2:
                raise ConfigError("--seeds must be >= 2")
            self._check_noise_method()
        elif self.command == "metrics":
            need("model", "data_images", "data_labels", "out")
            for m in self.methods or (self.method,):
                self.pipeline_tags(m)
        elif self.command == "invariance":
            need("data_images", "data_labels", "out")
            if self.model is None and not self.retrain:
                raise ConfigError("invariance requires --model or --retrain")
            self.pipeline_tags()
        elif self.command == "oob-rate":
            need("data_images", "data_labels", "out")
            self._check_noise_method()
        return self

    def _check_noise_method(self) -> None:
        if self.method not in ("sg", "ag"):
            raise ConfigError(f"{self.command} needs --method sg or ag, got {self.method}")

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready record of every set parameter, in field order."""
        d: dict[str, Any] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None or value == ():
                continue
            if isinstance(value, Path):
                value = str(value)
            elif isinstance(value, tuple):
                value = list(value)
            d[f.name] = value
        return d

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "ExperimentConfig":
        """Pick the dataclass fields out of an argparse namespace."""
        values = vars(args)
        kwargs = {f.name: values[f.name] for f in fields(cls) if values.get(f.name) is not None}
        for name in ("methods", "sample_counts"):
            if name in kwargs:
                kwargs[name] = tuple(kwargs[name])
        return cls(**kwargs)
