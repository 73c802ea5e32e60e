"""Mini-batch SGD training of the two-layer ReLU classifier.

Softmax cross-entropy on the logits, plain SGD without momentum or
weight decay.  Initialization and shuffling draw from one Philox stream
keyed by the config seed, so a given (dataset, config) always yields the
same weights.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import log_softmax, softmax

from ..config.defaults import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_EPOCHS,
    DEFAULT_HIDDEN_UNITS,
    DEFAULT_LEARNING_RATE,
)
from ..numerics.sampling import RngState
from .dataset import Dataset
from .errors import ConfigError, DataError, NumericError
from .model import MLP, ModelFunction

log = logging.getLogger(__name__)

# (epoch, mean training loss, training accuracy)
ProgressCallback = Callable[[int, float, float], None]


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = DEFAULT_EPOCHS
    learning_rate: float = DEFAULT_LEARNING_RATE
    batch_size: int = DEFAULT_BATCH_SIZE
    seed: int = 0
    hidden_units: int = DEFAULT_HIDDEN_UNITS

    def __post_init__(self) -> None:
        if int(self.epochs) < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if not float(self.learning_rate) > 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if int(self.batch_size) < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if int(self.hidden_units) < 1:
            raise ConfigError(f"hidden_units must be >= 1, got {self.hidden_units}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    loss: float
    accuracy: float


def _sgd_step(
    params: list[np.ndarray],
    X: np.ndarray,
    y: np.ndarray,
    lr: float,
) -> tuple[float, int]:
    """One SGD update in place; returns (summed loss, correct count)."""
    w0, b0, w1, b1 = params
    z0 = X @ w0.T + b0
    h = np.maximum(z0, 0.0)
    logits = h @ w1.T + b1

    log_p = log_softmax(logits, axis=1)
    rows = np.arange(X.shape[0])
    loss = float(-log_p[rows, y].sum())
    correct = int(np.count_nonzero(np.argmax(logits, axis=1) == y))

    # d(mean loss)/d logits
    d_logits = softmax(logits, axis=1)
    d_logits[rows, y] -= 1.0
    d_logits /= X.shape[0]

    grad_w1 = d_logits.T @ h
    grad_b1 = d_logits.sum(axis=0)
    d_h = (d_logits @ w1) * (z0 > 0.0)
    grad_w0 = d_h.T @ X
    grad_b0 = d_h.sum(axis=0)

    w0 -= lr * grad_w0
    b0 -= lr * grad_b0
    w1 -= lr * grad_w1
    b1 -= lr * grad_b1
    return loss, correct


def train_mlp(
    train: Dataset,
    cfg: Optional[TrainConfig] = None,
    progress: Optional[ProgressCallback] = None,
) -> tuple[MLP, list[EpochStats]]:
    """Train ``D → hidden → n_classes`` on *train*.

    Returns
    -------
    model, history:
        The trained network and one :class:`EpochStats` per epoch.

    Raises
    ------
    DataError:
        If *train* is empty.
    NumericError:
        If the loss diverges to a non-finite value.
    """
    cfg = cfg or TrainConfig()
    if len(train) == 0:
        raise DataError("cannot train on an empty dataset")

    gen = RngState(cfg.seed).generator()
    dims = [train.input_dim, int(cfg.hidden_units), train.n_classes]
    init = MLP.initialize(dims, gen)
    params = [np.array(p) for p in init.parameters()]

    X_all, y_all = train.images, train.labels
    n, bs, lr = len(train), int(cfg.batch_size), float(cfg.learning_rate)
    log.info("Training MLP %s on %d samples: %s", dims, n, cfg)

    history: list[EpochStats] = []
    for epoch in range(1, int(cfg.epochs) + 1):
        order = gen.permutation(n)
        total_loss, total_correct = 0.0, 0
        for start in range(0, n, bs):
            idx = order[start:start + bs]
            loss, correct = _sgd_step(params, X_all[idx], y_all[idx], lr)
            total_loss += loss
            total_correct += correct
        mean_loss = total_loss / n
        if not np.isfinite(mean_loss):
            raise NumericError(f"training diverged at epoch {epoch}")
        stats = EpochStats(epoch, mean_loss, total_correct / n)
        history.append(stats)
        log.info("epoch %d/%d loss=%.6f acc=%.4f", epoch, cfg.epochs, stats.loss, stats.accuracy)
        if progress is not None:
            progress(epoch, stats.loss, stats.accuracy)

    return init.with_parameters(params), history


def evaluate_accuracy(model: ModelFunction, data: Dataset) -> float:
    """Fraction of *data* whose arg-max logit matches the label."""
    if len(data) == 0:
        raise DataError("cannot evaluate on an empty dataset")
    logits = model.forward_batch(data.images)
    return float(np.mean(np.argmax(logits, axis=1) == data.labels))
