"""Monte Carlo convergence of smoothed gradients against the quadrature oracle.

On a one-dimensional sinusoid the smoothed gradient is a Gaussian
convolution that quadrature evaluates to ~1e-9.  The RMSE of the
N-sample estimate over independent seeds should fall as N^(-1/2).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from ..attribution.base import SmootherConfig, SmootherMode
from ..attribution.smoothing import smoothed_gradient, smoothing_sigma
from ..core.domain import DataRange
from ..core.errors import ConfigError
from ..core.model import Sinusoid1D
from ..numerics.quadrature import smoothed_gradient_oracle
from ..numerics.sampling import derive_seed

log = logging.getLogger(__name__)

DEFAULT_SAMPLE_COUNTS = (10, 40, 160, 640, 2560, 10240)
DEFAULT_SEEDS = 32

# α = 0.1 on [-1, 1] gives σ = 0.2
CONVERGENCE_FREQUENCY = 3.0
CONVERGENCE_POINT = 0.7
CONVERGENCE_RANGE = DataRange(-1.0, 1.0)
CONVERGENCE_ALPHA = 0.1

CSV_HEADER = ("n", "rmse", "mean", "std", "oracle")


@dataclass(frozen=True)
class ConvergencePoint:
    """Statistics of the N-sample estimate across seeds.

    ``std`` is the spread of single estimates, i.e. the Monte Carlo
    standard error of one N-sample run; ``first`` is the run under the
    first seed.
    """

    n: int
    rmse: float
    mean: float
    std: float
    first: float


@dataclass(frozen=True)
class ConvergenceResult:
    method: str
    sigma: float
    oracle: float
    points: list[ConvergencePoint] = field(default_factory=list)
    slope: float = float("nan")
    intercept: float = float("nan")
    n_seeds: int = DEFAULT_SEEDS

    def as_rows(self) -> list[tuple[Any, ...]]:
        return [(p.n, p.rmse, p.mean, p.std, self.oracle) for p in self.points]

    def within_standard_errors(self, k: float = 3.0) -> bool:
        """First-seed estimate at the largest N lies within *k* standard errors of the oracle."""
        last = self.points[-1]
        return abs(last.first - self.oracle) <= k * last.std

    def to_dict(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "sigma": self.sigma,
            "oracle": self.oracle,
            "slope": self.slope,
            "intercept": self.intercept,
            "n_seeds": self.n_seeds,
        }


def fit_loglog(ns: Sequence[int], errors: Sequence[float]) -> tuple[float, float]:
    """Least-squares line through ``(log N, log error)``: ``(slope, intercept)``."""
    slope, intercept = np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(errors, float)), 1)
    return float(slope), float(intercept)


def convergence_study(
    smoother: Optional[SmootherConfig] = None,
    sample_counts: Sequence[int] = DEFAULT_SAMPLE_COUNTS,
    n_seeds: int = DEFAULT_SEEDS,
    seed: int = 0,
    model: Optional[Sinusoid1D] = None,
    x: float = CONVERGENCE_POINT,
    data_range: DataRange = CONVERGENCE_RANGE,
) -> ConvergenceResult:
    """RMSE of the N-sample smoothed gradient over *n_seeds* seeds, per N.

    The oracle is the unbounded Gaussian convolution at the σ the
    smoother uses at *x*; seed ``s`` of every N is ``derive_seed(seed, s)``.

    Raises
    ------
    ConfigError:
        For an unsmoothed config, fewer than two sample counts or fewer
        than two seeds.
    """
    smoother = smoother or SmootherConfig.smoothgrad(CONVERGENCE_ALPHA)
    if not smoother.is_smoothing:
        raise ConfigError("convergence study needs an SG or AG smoother")
    counts = sorted({int(n) for n in sample_counts})
    if len(counts) < 2 or counts[0] < 1:
        raise ConfigError("need at least two positive sample counts")
    if n_seeds < 2:
        raise ConfigError("need at least two seeds")
    model = model or Sinusoid1D.from_frequency(CONVERGENCE_FREQUENCY)

    point = np.array([float(x)])
    sigma = float(smoothing_sigma(point, smoother, data_range)[0])
    oracle = smoothed_gradient_oracle(model, x, sigma)
    log.info("convergence %s: sigma=%.6g oracle=%.12g", smoother.mode.value, sigma, oracle)

    points = []
    for n in counts:
        estimates = np.empty(n_seeds)
        for s in range(n_seeds):
            cfg = SmootherConfig(
                smoother.mode, n, smoother.alpha, smoother.confidence, derive_seed(seed, s)
            )
            estimates[s] = smoothed_gradient(model, point, 0, cfg, data_range)[0]
        err = estimates - oracle
        points.append(ConvergencePoint(
            n=n,
            rmse=float(np.sqrt(np.mean(err * err))),
            mean=float(estimates.mean()),
            std=float(estimates.std(ddof=1)),
            first=float(estimates[0]),
        ))
        log.debug("N=%d rmse=%.3g", n, points[-1].rmse)

    slope, intercept = fit_loglog([p.n for p in points], [p.rmse for p in points])
    log.info("convergence slope %.4f", slope)
    return ConvergenceResult(
        method="sg" if smoother.mode is SmootherMode.SMOOTHGRAD else "ag",
        sigma=sigma,
        oracle=oracle,
        points=points,
        slope=slope,
        intercept=intercept,
        n_seeds=n_seeds,
    )
