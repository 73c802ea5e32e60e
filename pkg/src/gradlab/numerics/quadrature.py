"""Adaptive quadrature and the one-dimensional smoothed-gradient oracle."""

from __future__ import annotations

import logging
import math
import warnings
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from ..core.domain import DataRange
from ..core.errors import ConfigError, QuadratureError
from ..core.model import ModelFunction
from .special import normal_pdf

log = logging.getLogger(__name__)

# Tail mass beyond ±8σ is below 1e-15
UNBOUNDED_HALF_WIDTH = 8.0

DEFAULT_SUBDIVISIONS = 200


def quadrature(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-9,
    limit: int = DEFAULT_SUBDIVISIONS,
) -> float:
    """∫_a^b f(x) dx with estimated absolute error ≤ *tol*.

    Uses QUADPACK's adaptive Gauss–Kronrod scheme (``scipy.integrate.quad``).

    Raises
    ------
    ConfigError:
        If ``a >= b`` or ``tol <= 0``.
    QuadratureError:
        If the subdivision budget is exhausted or the error estimate
        exceeds *tol*; the best estimate and its bound are attached.
    """
    if not a < b:
        raise ConfigError(f"quadrature bounds must satisfy a < b, got [{a}, {b}]")
    if not tol > 0:
        raise ConfigError("quadrature tolerance must be positive")

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        value, abserr = integrate.quad(f, a, b, epsabs=tol, epsrel=0.0, limit=limit)

    failures = [w for w in caught if issubclass(w.category, integrate.IntegrationWarning)]
    for w in caught:
        if w not in failures:
            warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)

    log.debug("quad [%g, %g] -> %r (err %.3g)", a, b, value, abserr)
    if failures or not math.isfinite(value) or abserr > tol:
        reason = str(failures[0].message).splitlines()[0] if failures else "tolerance not met"
        raise QuadratureError(f"quadrature did not converge ({reason})", value, abserr)
    return float(value)


def smoothed_gradient_oracle(
    model: ModelFunction,
    x: float,
    sigma: float,
    data_range: Optional[DataRange] = None,
    tol: float = 1e-9,
) -> float:
    """∫ G(x + ε) p(ε) dε for a one-dimensional model, by quadrature.

    The integral runs over ``[-8σ, 8σ]``, intersected with
    ``[x_min - x, x_max - x]`` when *data_range* is given (mass outside
    the domain is dropped, not renormalized).  ``sigma == 0`` returns G(x) exactly.
    """
    if model.input_dim != 1:
        raise ConfigError(
            f"oracle needs a one-dimensional model, got input_dim={model.input_dim}"
        )
    if sigma < 0:
        raise ConfigError("sigma must be >= 0")
    x = float(x)
    if sigma == 0:
        return float(model.input_gradient([x], 0)[0])

    def integrand(eps: float) -> float:
        g = model.input_gradient([x + eps], 0)[0]
        return float(g * normal_pdf(eps, sigma))

    lo, hi = -UNBOUNDED_HALF_WIDTH * sigma, UNBOUNDED_HALF_WIDTH * sigma
    if data_range is not None:
        lo, hi = max(lo, data_range.x_min - x), min(hi, data_range.x_max - x)
        if lo >= hi:
            return 0.0
    return quadrature(integrand, lo, hi, tol=tol)


def gaussian_mass(lo: float, hi: float, sigma: float, tol: float = 1e-12) -> float:
    """Probability mass of N(0, σ²) on ``[lo, hi]`` by quadrature."""
    # Beyond 40σ the density underflows to zero
    lo, hi = max(lo, -40.0 * sigma), min(hi, 40.0 * sigma)
    if lo >= hi:
        return 0.0
    return quadrature(lambda t: float(normal_pdf(t, sigma)), lo, hi, tol=tol)


def integrate_piecewise(
    f: Callable[[float], float],
    breakpoints: "list[float] | np.ndarray",
    tol: float = 1e-9,
) -> float:
    """Sum of quadratures over consecutive breakpoint intervals."""
    pts = sorted(float(p) for p in breakpoints)
    pieces = [(a, b) for a, b in zip(pts[:-1], pts[1:]) if b > a]
    if not pieces:
        raise ConfigError("need at least two distinct breakpoints")
    share = tol / len(pieces)
    return sum(quadrature(f, a, b, tol=share) for a, b in pieces)
