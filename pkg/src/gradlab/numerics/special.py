"""Error function and its inverse.

Thin, domain-checked wrappers over ``scipy.special``; both accept scalars
or arrays and return the same kind.
"""

from __future__ import annotations

import math
from typing import Union

import numpy as np
from numpy.typing import ArrayLike
from scipy import special

from ..core.errors import DomainError

Real = Union[float, np.ndarray]

SQRT2 = math.sqrt(2.0)


def _unwrap(result: np.ndarray) -> Real:
    return float(result) if np.ndim(result) == 0 else result


def erf(x: ArrayLike) -> Real:
    """Error function; total on the reals."""
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError("erf argument must be finite")
    return _unwrap(special.erf(arr))


def erfc(x: ArrayLike) -> Real:
    """Complementary error function ``1 - erf(x)`` without cancellation."""
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DomainError("erfc argument must be finite")
    return _unwrap(special.erfc(arr))


def erfinv(p: ArrayLike) -> Real:
    """Inverse error function on the open interval (-1, 1).

    Raises
    ------
    DomainError:
        If any ``|p| >= 1`` or *p* is not finite.
    """
    arr = np.asarray(p, dtype=np.float64)
    if not np.all(np.abs(arr) < 1.0):
        raise DomainError(f"erfinv is defined on (-1, 1), got {p!r}")
    return _unwrap(special.erfinv(arr))


def confidence_z(c: float) -> float:
    """Half-width, in standard deviations, of the two-sided interval
    holding probability ``(1 + c) / 2``: ``√2 · erfinv((1 + c) / 2)``."""
    return SQRT2 * float(erfinv((1.0 + c) / 2.0))


def normal_pdf(t: ArrayLike, sigma: float = 1.0) -> Real:
    arr = np.asarray(t, dtype=np.float64)
    return _unwrap(np.exp(-0.5 * (arr / sigma) ** 2) / (sigma * math.sqrt(2.0 * math.pi)))
