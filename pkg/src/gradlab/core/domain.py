"""Data range (valid input domain) definition."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .errors import ConfigError


@dataclass(frozen=True)
class DataRange:
    """Per-dataset bounds ``[x_min, x_max]``.

    The valid domain of a D-dimensional input is the axis-aligned box
    ``[x_min, x_max]^D``.
    """

    x_min: float
    x_max: float

    def __post_init__(self) -> None:
        lo, hi = float(self.x_min), float(self.x_max)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ConfigError("data range bounds must be finite")
        if not lo < hi:
            raise ConfigError(
                f"x_min ({lo}) must be less than x_max ({hi})"
            )
        object.__setattr__(self, "x_min", lo)
        object.__setattr__(self, "x_max", hi)

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.x_min + self.x_max)

    def contains(self, x: ArrayLike) -> bool:
        """True when every element of *x* lies within the bounds."""
        arr = np.asarray(x, dtype=np.float64)
        return bool(np.all((arr >= self.x_min) & (arr <= self.x_max)))

    def shifted(self, shift: float) -> "DataRange":
        """Range translated by the constant *shift*."""
        return DataRange(self.x_min + shift, self.x_max + shift)

    def clip(self, x: ArrayLike) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=np.float64), self.x_min, self.x_max)

    def to_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max}
