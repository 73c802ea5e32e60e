"""Inherent noise: probability that a Gaussian perturbation leaves the data range.

For a coordinate ``x_i`` in ``[x_min, x_max]`` perturbed by
``ε ~ N(0, σ²)``::

    A^i = 1 - [Φ((x_max - x_i)/σ) - Φ((x_min - x_i)/σ)]

SmoothGrad uses one σ = α (x_max - x_min) for every coordinate, AdaptGrad
a per-coordinate σ_i shrinking towards the bounds.  A point mass (σ = 0)
never leaves the range, so its inherent noise is 0.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy import optimize

from ..attribution.base import SmootherConfig, SmootherMode
from ..attribution.smoothing import adaptgrad_sigma, smoothing_sigma
from ..config.defaults import CONFIDENCE_SWEEP, DEFAULT_ALPHA
from ..core.dataset import Dataset
from ..core.domain import DataRange
from ..core.errors import ConfigError, DataError, DomainError, NumericError
from ..numerics.quadrature import gaussian_mass, integrate_piecewise
from ..numerics.sampling import GaussianKernel, RngState, sample_gaussian
from ..numerics.special import SQRT2, erf, erfc
from ..workers import map_ordered

log = logging.getLogger(__name__)

# Grid used for the per-dimension profile when no input is given
PROFILE_RESOLUTION = 1001


def _check_inside(x: np.ndarray, data_range: DataRange) -> None:
    if not data_range.contains(x):
        raise DomainError(
            f"x lies outside the data range [{data_range.x_min}, {data_range.x_max}]"
        )


def _unwrap(a: np.ndarray) -> "float | np.ndarray":
    return float(a) if np.ndim(a) == 0 else a


def inherent_noise_point(
    x: ArrayLike, sigma: ArrayLike, data_range: DataRange
) -> "float | np.ndarray":
    """A^i for coordinate(s) *x* under N(0, σ²); σ may be per-coordinate.

    Both tails are evaluated with ``erfc`` so tiny probabilities keep
    their relative precision.

    Raises
    ------
    ConfigError:
        If any σ is negative.
    DomainError:
        If any coordinate lies outside *data_range*.
    """
    x = np.asarray(x, dtype=np.float64)
    sigma = np.broadcast_to(np.asarray(sigma, dtype=np.float64), x.shape)
    if np.any(sigma < 0.0) or not np.all(np.isfinite(sigma)):
        raise ConfigError("sigma must be finite and >= 0")
    _check_inside(x, data_range)

    out = np.zeros(x.shape)
    live = sigma > 0.0
    if np.any(live):
        s = sigma[live] * SQRT2
        upper = 0.5 * np.asarray(erfc((data_range.x_max - x[live]) / s))
        lower = 0.5 * np.asarray(erfc((x[live] - data_range.x_min) / s))
        out[live] = upper + lower
    return _unwrap(out)


def inherent_noise_sg(x: ArrayLike, alpha: float, data_range: DataRange) -> "float | np.ndarray":
    """SmoothGrad inherent noise in its erf closed form.

    ``1 - ½ erf((x_max - x)/(√2 σ)) + ½ erf((x_min - x)/(√2 σ))`` with
    ``σ = α (x_max - x_min)``.
    """
    if not alpha > 0:
        raise ConfigError(f"alpha must be > 0, got {alpha}")
    x = np.asarray(x, dtype=np.float64)
    _check_inside(x, data_range)
    s = SQRT2 * alpha * data_range.width
    a = (
        1.0
        - 0.5 * np.asarray(erf((data_range.x_max - x) / s))
        + 0.5 * np.asarray(erf((data_range.x_min - x) / s))
    )
    return _unwrap(a)


def inherent_noise_ag(x: ArrayLike, confidence: float, data_range: DataRange) -> "float | np.ndarray":
    """AdaptGrad inherent noise with σ_i from :func:`adaptgrad_sigma`.

    The near-side tail is exactly ``(1 - c)/4`` for every interior
    coordinate, so the total never exceeds ``(1 - c)/2``.
    """
    x = np.asarray(x, dtype=np.float64)
    sigma = adaptgrad_sigma(x, data_range, confidence).reshape(x.shape)
    return inherent_noise_point(x, sigma, data_range)


def inherent_noise_numeric(
    x: float, sigma: float, data_range: DataRange, tol: float = 1e-12
) -> float:
    """``1 - ∫_{x_min-x}^{x_max-x} p(t) dt`` by adaptive quadrature."""
    x = float(x)
    if sigma < 0:
        raise ConfigError("sigma must be >= 0")
    _check_inside(np.asarray(x), data_range)
    if sigma == 0:
        return 0.0
    return 1.0 - gaussian_mass(data_range.x_min - x, data_range.x_max - x, sigma, tol=tol)


def inherent_noise(
    x: ArrayLike, smoother: SmootherConfig, data_range: DataRange
) -> "float | np.ndarray":
    """A^i under the smoother's own σ (SmoothGrad or AdaptGrad)."""
    if smoother.mode is SmootherMode.SMOOTHGRAD:
        return inherent_noise_sg(x, smoother.alpha, data_range)
    if smoother.mode is SmootherMode.ADAPTGRAD:
        return inherent_noise_ag(x, smoother.confidence, data_range)
    raise ConfigError("inherent noise needs an SG or AG smoother")


def expected_inherent_noise(
    smoother: SmootherConfig, data_range: DataRange, tol: float = 1e-6
) -> float:
    """Mean of A^i over ``x_i`` uniform on the range, by quadrature.

    The integral is split at the midpoint, where the AdaptGrad σ has a
    kink.
    """
    def integrand(t: float) -> float:
        return float(inherent_noise(t, smoother, data_range))

    breakpoints = [data_range.x_min, data_range.midpoint, data_range.x_max]
    total = integrate_piecewise(integrand, breakpoints, tol=tol * data_range.width)
    area = total / data_range.width
    log.debug("expected inherent noise %s = %.6g", smoother.to_dict(), area)
    return area


def dataset_inherent_noise(
    pixels: ArrayLike, smoother: SmootherConfig, data_range: DataRange
) -> float:
    """Mean A^i weighted by the empirical distribution of *pixels*."""
    pixels = np.asarray(pixels, dtype=np.float64).reshape(-1)
    if pixels.size == 0:
        raise DataError("no pixel values given")
    levels, counts = np.unique(pixels, return_counts=True)
    a = np.asarray(inherent_noise(levels, smoother, data_range))
    return float(np.dot(a, counts) / pixels.size)


# ----------------------------------------------------------------------
# Empirical out-of-bounds rates
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class OOBStats:
    """Empirical out-of-bounds counts next to the analytic prediction."""

    image_rate: float
    pixel_rate: float
    n_images: int
    n_samples: int
    seed: int
    analytic_mean: float
    analytic_se: float

    @property
    def z_score(self) -> float:
        if self.analytic_se == 0.0:
            return 0.0 if self.pixel_rate == self.analytic_mean else float("inf")
        return (self.pixel_rate - self.analytic_mean) / self.analytic_se

    def to_dict(self) -> dict[str, Any]:
        return {
            "image_rate": self.image_rate,
            "pixel_rate": self.pixel_rate,
            "n": self.n_samples,
            "n_images": self.n_images,
            "seed": self.seed,
            "analytic_mean": self.analytic_mean,
            "analytic_se": self.analytic_se,
        }


def empirical_oob_rate(
    dataset: Dataset,
    smoother: SmootherConfig,
    n_samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> OOBStats:
    """Draw *n_samples* perturbations per image and count escapes.

    Image ``i`` uses stream ``(seed, i)``.  ``image_rate`` is the share of
    images with at least one out-of-bounds coordinate in any sample;
    ``pixel_rate`` the share of (pixel, sample) pairs out of bounds.

    Raises
    ------
    DataError:
        If *dataset* is empty.
    """
    if len(dataset) == 0:
        raise DataError("empirical out-of-bounds rate needs a non-empty dataset")
    if not smoother.is_smoothing:
        raise ConfigError("empirical out-of-bounds rate needs an SG or AG smoother")
    n = int(n_samples if n_samples is not None else smoother.n_samples)
    if n < 1:
        raise ConfigError("n_samples must be >= 1")
    seed = int(seed if seed is not None else smoother.seed)
    rng_range = dataset.range

    def count(i: int) -> tuple[bool, int, float, float]:
        x = dataset.images[i]
        kernel = GaussianKernel(smoothing_sigma(x, smoother, rng_range))
        perturbed = x + sample_gaussian(RngState(seed, i), kernel, n_draws=n)
        out = (perturbed < rng_range.x_min) | (perturbed > rng_range.x_max)
        p = np.asarray(inherent_noise(x, smoother, rng_range))
        return bool(out.any()), int(out.sum()), float(p.sum()), float((p * (1.0 - p)).sum())

    results = map_ordered(count, range(len(dataset)))
    images_hit = sum(r[0] for r in results)
    pixels_out = sum(r[1] for r in results)
    p_sum = sum(r[2] for r in results)
    var_sum = sum(r[3] for r in results)

    total = len(dataset) * dataset.input_dim
    stats = OOBStats(
        image_rate=images_hit / len(dataset),
        pixel_rate=pixels_out / (total * n),
        n_images=len(dataset),
        n_samples=n,
        seed=seed,
        analytic_mean=p_sum / total,
        analytic_se=float(np.sqrt(n * var_sum) / (n * total)),
    )
    log.info(
        "OOB %s: image %.4f pixel %.6f (analytic %.6f ± %.2g)",
        smoother.mode.value, stats.image_rate, stats.pixel_rate,
        stats.analytic_mean, stats.analytic_se,
    )
    return stats


# ----------------------------------------------------------------------
# Exact σ for a target confidence
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class SigmaSolution:
    """σ with A^i(σ) = 1 - c, or a degenerate marker when none exists."""

    sigma: float
    residual: float
    degenerate: bool
    iterations: int = 0


def solve_sigma_exact(
    x: float,
    confidence: float,
    data_range: DataRange,
    tol: float = 1e-10,
) -> SigmaSolution:
    """Solve ``A^i(σ) = 1 - c`` for σ by bisection.

    A^i increases monotonically in σ, so the root is unique.  A
    coordinate on a bound has A^i ≥ ½ for every σ > 0; if ``1 - c ≤ ½``
    there is no positive solution and the result is degenerate.

    Raises
    ------
    ConfigError:
        If *confidence* is outside (0, 1).
    DomainError:
        If *x* lies outside the range.
    NumericError:
        If the root cannot be bracketed or misses *tol*.
    """
    if not 0.0 < confidence < 1.0:
        raise ConfigError(f"confidence must lie in (0, 1), got {confidence}")
    x = float(x)
    _check_inside(np.asarray(x), data_range)
    target = 1.0 - confidence
    on_bound = x in (data_range.x_min, data_range.x_max)
    if on_bound and target <= 0.5:
        return SigmaSolution(0.0, float("nan"), True)

    def residual(sigma: float) -> float:
        return float(inherent_noise_point(x, sigma, data_range)) - target

    hi = data_range.width
    for _ in range(200):
        if residual(hi) > 0.0:
            break
        hi *= 2.0
        log.debug("solve_sigma_exact: widening bracket to %g", hi)
    else:
        raise NumericError(f"could not bracket σ for x={x}, c={confidence}")

    sigma, info = optimize.bisect(
        residual, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps,
        maxiter=2000, full_output=True, disp=False,
    )
    r = residual(sigma)
    if abs(r) > tol:
        raise NumericError(f"σ solver residual {r:.3g} exceeds {tol:.3g}")
    return SigmaSolution(float(sigma), r, False, int(info.iterations))


# ----------------------------------------------------------------------
# Reports
# ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NoiseReport:
    """Per-dimension and aggregate inherent noise for one smoother."""

    smoother: SmootherConfig
    data_range: DataRange
    per_dimension: np.ndarray
    expected_area: float
    empirical: Optional[OOBStats] = None
    aggregate_mean: float = field(init=False)

    def __post_init__(self) -> None:
        a = np.asarray(self.per_dimension, dtype=np.float64).reshape(-1)
        if a.size == 0:
            raise DataError("noise report needs at least one dimension")
        if np.any(a < 0.0) or np.any(a > 1.0):
            raise NumericError("inherent noise probabilities must lie in [0, 1]")
        object.__setattr__(self, "per_dimension", a)
        object.__setattr__(self, "aggregate_mean", float(a.mean()))

    @property
    def method(self) -> str:
        return self.smoother.mode.value

    @property
    def params(self) -> dict[str, float]:
        if self.smoother.mode is SmootherMode.SMOOTHGRAD:
            return {"alpha": self.smoother.alpha}
        return {"confidence": self.smoother.confidence}

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "method": self.method,
            "params": self.params,
            "range": self.data_range.to_dict(),
            "aggregate_mean": self.aggregate_mean,
            "expected_area": self.expected_area,
            "per_dimension": [float(v) for v in self.per_dimension],
        }
        if self.empirical is not None:
            d["empirical"] = self.empirical.to_dict()
        return d


def noise_report(
    smoother: SmootherConfig,
    data_range: DataRange,
    x: Optional[ArrayLike] = None,
    dataset: Optional[Dataset] = None,
    n_samples: Optional[int] = None,
    seed: Optional[int] = None,
    tol: float = 1e-6,
) -> NoiseReport:
    """Assemble a :class:`NoiseReport`.

    ``per_dimension`` holds A^i at *x* when given, otherwise the per-pixel
    mean over *dataset*, otherwise a uniform grid over the range.  With a
    dataset the empirical out-of-bounds rates are attached as well.
    """
    if x is not None:
        per_dim = np.asarray(inherent_noise(np.asarray(x, dtype=np.float64), smoother, data_range))
    elif dataset is not None:
        per_dim = np.mean(
            [np.asarray(inherent_noise(img, smoother, data_range)) for img in dataset.images],
            axis=0,
        )
    else:
        grid = np.linspace(data_range.x_min, data_range.x_max, PROFILE_RESOLUTION)
        per_dim = np.asarray(inherent_noise(grid, smoother, data_range))

    empirical = None
    if dataset is not None:
        empirical = empirical_oob_rate(dataset, smoother, n_samples, seed)
    return NoiseReport(
        smoother=smoother,
        data_range=data_range,
        per_dimension=per_dim,
        expected_area=expected_inherent_noise(smoother, data_range, tol),
        empirical=empirical,
    )


def noise_sweep(
    data_range: DataRange,
    confidences: Sequence[float] = CONFIDENCE_SWEEP,
    alpha: float = DEFAULT_ALPHA,
    tol: float = 1e-6,
) -> list[NoiseReport]:
    """SmoothGrad at *alpha* followed by AdaptGrad at each confidence."""
    configs = [SmootherConfig.smoothgrad(alpha)]
    configs += [SmootherConfig.adaptgrad(c) for c in confidences]
    return [noise_report(cfg, data_range, tol=tol) for cfg in configs]
