"""Default hyper-parameters and named data ranges.

These follow common practice for SmoothGrad-style explainers; NoiseGrad
and IG constants are implementation defaults, not published values.
"""

from __future__ import annotations

from enum import Enum

from ..core.domain import DataRange

# Smoothing
DEFAULT_ALPHA = 0.2
DEFAULT_CONFIDENCE = 0.95
DEFAULT_SAMPLES = 50
CONFIDENCE_SWEEP = (0.95, 0.99, 0.995, 0.999)

# Monte Carlo samples evaluated per batched gradient call
SAMPLE_BLOCK = 64

# NoiseGrad: multiplicative parameter noise
DEFAULT_NG_MODELS = 25
DEFAULT_NG_SIGMA = 0.1

# Integrated gradients
DEFAULT_IG_STEPS = 64

# Metrics
CONSISTENCY_PERTURBATIONS = 10
CONSISTENCY_DELTA_FRACTION = 0.01
CONSISTENCY_FORMULA = "consistency-v1: mean ||E(x)-E(x+u)||_2 / (||E(x)||_2 + 1e-12)"
INVARIANCE_SHIFT = 1.0

# Training (two-layer MLP, plain SGD)
DEFAULT_HIDDEN_UNITS = 200
DEFAULT_EPOCHS = 20
DEFAULT_LEARNING_RATE = 0.01
DEFAULT_BATCH_SIZE = 32


class RangeProfile(Enum):
    MNIST = "mnist"
    IMAGENET = "imagenet"


_RANGES: dict[RangeProfile, DataRange] = {
    RangeProfile.MNIST: DataRange(0.0, 1.0),
    # Per-channel standardized ILSVRC2012 pixels
    RangeProfile.IMAGENET: DataRange(-2.12, 2.64),
}


def get_range(profile: RangeProfile) -> DataRange:
    return _RANGES[profile]
