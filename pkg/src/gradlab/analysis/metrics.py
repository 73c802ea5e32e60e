"""Explanation quality metrics: consistency, invariance, sparseness, information level."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Optional, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy import stats

from ..attribution.base import Explainer, SaliencyMap
from ..config.defaults import (
    CONSISTENCY_DELTA_FRACTION,
    CONSISTENCY_PERTURBATIONS,
    INVARIANCE_SHIFT,
)
from ..core.dataset import Dataset
from ..core.domain import DataRange
from ..core.errors import ConfigError, DataError, UndefinedMetricError
from ..core.model import ModelFunction
from ..core.train import TrainConfig, train_mlp
from ..numerics.sampling import RngState, derive_seed, uniform_box
from ..workers import map_ordered

log = logging.getLogger(__name__)

MapLike = Union[SaliencyMap, ArrayLike]


class MetricKind(Enum):
    CONSISTENCY = "consistency"
    INVARIANCE = "invariance"
    SPARSENESS = "sparseness"
    INFORMATION_LEVEL = "information_level"


CSV_HEADER = ("metric", "method_chain", "model_id", "n_inputs", "value", "seed")


@dataclass(frozen=True)
class MetricResult:
    metric: MetricKind
    value: float
    method_chain: str
    model_id: str
    n_inputs: int
    seed: int = 0

    def as_row(self) -> tuple[Any, ...]:
        return (self.metric.value, self.method_chain, self.model_id,
                self.n_inputs, float(self.value), self.seed)


def _magnitudes(saliency: MapLike) -> np.ndarray:
    values = saliency.values if isinstance(saliency, SaliencyMap) else saliency
    a = np.abs(np.asarray(values, dtype=np.float64).reshape(-1))
    if a.size == 0:
        raise UndefinedMetricError("metric is undefined for an empty map")
    total = a.sum()
    if total == 0.0:
        raise UndefinedMetricError("metric is undefined for an all-zero map")
    return a


def sparseness_gini(saliency: MapLike) -> float:
    """Gini index of ``|values|``: 0 for a uniform map, (n-1)/n for one-hot.

    ``Σ_k (2k - n - 1) a_k / (n Σ a_k)`` over the ascending sort.
    """
    a = np.sort(_magnitudes(saliency))
    n = a.size
    k = np.arange(1, n + 1)
    return float(np.sum((2 * k - n - 1) * a) / (n * a.sum()))


def information_entropy(saliency: MapLike) -> float:
    """Shannon entropy in bits of the normalized ``|values|``."""
    a = _magnitudes(saliency)
    return float(stats.entropy(a / a.sum(), base=2))


# ----------------------------------------------------------------------
# Consistency
# ----------------------------------------------------------------------


def _class_for(model: ModelFunction, x: np.ndarray, class_indices: Optional[Sequence[int]], j: int) -> int:
    return int(class_indices[j]) if class_indices is not None else model.predict(x)


def _as_inputs(inputs: ArrayLike, dim: int) -> np.ndarray:
    X = np.asarray(inputs, dtype=np.float64)
    if X.size == 0:
        raise DataError("metric needs at least one input")
    X = X.reshape(-1, dim) if X.ndim != 2 else X
    if X.shape[1] != dim:
        raise ConfigError(f"inputs have {X.shape[1]} features, model expects {dim}")
    return X


def consistency_score(
    explainer: Explainer,
    model: ModelFunction,
    inputs: ArrayLike,
    delta: Optional[float] = None,
    seed: int = 0,
    data_range: Optional[DataRange] = None,
    class_indices: Optional[Sequence[int]] = None,
    n_perturbations: int = CONSISTENCY_PERTURBATIONS,
) -> float:
    """Mean normalized change of the explanation under small input noise.

    For each input and each of *n_perturbations* draws
    ``u ~ U[-δ, δ]^D``: ``‖E(x) - E(x+u)‖₂ / (‖E(x)‖₂ + 1e-12)``.
    Perturbed inputs are clipped to *data_range* when one is given.
    Lower is more consistent.  *delta* defaults to 1% of the range width.

    Raises
    ------
    DataError:
        If *inputs* is empty.
    ConfigError:
        If δ ≤ 0, or neither δ nor a range is given.
    """
    if delta is None:
        if data_range is None:
            raise ConfigError("consistency needs delta or a data range")
        delta = CONSISTENCY_DELTA_FRACTION * data_range.width
    if not delta > 0:
        raise ConfigError(f"delta must be > 0, got {delta}")
    X = _as_inputs(inputs, model.input_dim)

    def score(j: int) -> float:
        x = X[j]
        c = _class_for(model, x, class_indices, j)
        ref = explainer(model, x, c).values
        norm = np.linalg.norm(ref) + 1e-12
        stream_seed = derive_seed(seed, j)
        total = 0.0
        for k in range(n_perturbations):
            xp = x + uniform_box(RngState(stream_seed, k), delta, x.size)
            if data_range is not None:
                xp = data_range.clip(xp)
            total += np.linalg.norm(ref - explainer(model, xp, c).values) / norm
        return total / n_perturbations

    scores = map_ordered(score, range(X.shape[0]))
    return float(np.mean(scores))


# ----------------------------------------------------------------------
# Invariance
# ----------------------------------------------------------------------


def build_shifted_pair(model: ModelFunction, shift: float = INVARIANCE_SHIFT) -> tuple[ModelFunction, ModelFunction]:
    """``(M1, M2)`` where M2 sees ``x + shift`` exactly as M1 sees ``x``."""
    return model, model.shift_compensated(shift)


def retrain_shifted_pair(
    train: Dataset,
    cfg: Optional[TrainConfig] = None,
    shift: float = INVARIANCE_SHIFT,
) -> tuple[ModelFunction, ModelFunction]:
    """Train M1 on *train* and M2 on the shifted copy with the same seed."""
    cfg = cfg or TrainConfig()
    m1, _ = train_mlp(train, cfg)
    m2, _ = train_mlp(train.shifted(shift), cfg)
    return m1, m2


def invariance_check(
    explainer: Explainer,
    model_pair: tuple[ModelFunction, ModelFunction],
    shift: float,
    inputs: ArrayLike,
    data_range: Optional[DataRange] = None,
    class_indices: Optional[Sequence[int]] = None,
) -> float:
    """Mean over inputs of ``‖E(M1, x) - E(M2, x + s)‖₁ / D``.

    If *explainer* offers ``with_range`` and *data_range* is given, M1 is
    explained on the range and M2 on the range shifted by *s*.

    Raises
    ------
    ConfigError:
        If the two models or their maps disagree in shape.
    """
    m1, m2 = model_pair
    if m1.input_dim != m2.input_dim or m1.output_dim != m2.output_dim:
        raise ConfigError("invariance needs two models of the same shape")
    X = _as_inputs(inputs, m1.input_dim)

    e1: Callable = explainer
    e2: Callable = explainer
    if data_range is not None and hasattr(explainer, "with_range"):
        e1 = explainer.with_range(data_range)
        e2 = explainer.with_range(data_range.shifted(shift))

    def distance(j: int) -> float:
        x = X[j]
        c = _class_for(m1, x, class_indices, j)
        a = e1(m1, x, c).values
        b = e2(m2, x + shift, c).values
        if a.shape != b.shape:
            raise ConfigError("explanations of the two models differ in shape")
        return float(np.abs(a - b).sum() / a.size)

    return float(np.mean(map_ordered(distance, range(X.shape[0]))))


# ----------------------------------------------------------------------
# Sweeps
# ----------------------------------------------------------------------

MAP_METRICS: dict[MetricKind, Callable[[MapLike], float]] = {
    MetricKind.SPARSENESS: sparseness_gini,
    MetricKind.INFORMATION_LEVEL: information_entropy,
}


def evaluate_maps(
    explainers: Sequence[Explainer],
    model: ModelFunction,
    inputs: ArrayLike,
    class_indices: Optional[Sequence[int]] = None,
    metrics: Sequence[MetricKind] = (MetricKind.SPARSENESS, MetricKind.INFORMATION_LEVEL),
    seed: int = 0,
) -> list[MetricResult]:
    """Mean sparseness / information level per explainer over *inputs*.

    Explainers without a ``method_chain`` attribute are labelled by the
    chain of the first map they produce.
    """
    for m in metrics:
        if m not in MAP_METRICS:
            raise ConfigError(f"{m.value} is not a per-map metric")
    X = _as_inputs(inputs, model.input_dim)
    results: list[MetricResult] = []
    for explainer in explainers:
        def run(j: int) -> tuple[str, list[float]]:
            x = X[j]
            smap = explainer(model, x, _class_for(model, x, class_indices, j))
            return smap.method_chain, [MAP_METRICS[m](smap) for m in metrics]

        rows = map_ordered(run, range(X.shape[0]))
        chain = getattr(explainer, "method_chain", rows[0][0])
        values = np.array([r[1] for r in rows])
        for i, m in enumerate(metrics):
            results.append(MetricResult(m, float(values[:, i].mean()), chain,
                                        model.model_id, X.shape[0], seed))
            log.info("%s %s = %.6f", chain, m.value, results[-1].value)
    return results
