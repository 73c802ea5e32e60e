"""Input vector coercion.

Tensors are plain float64 numpy arrays; this module is the single place
where external values are converted and checked.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from numpy.typing import ArrayLike

from .errors import ConfigError, InputShapeError


def as_vector(
    x: ArrayLike,
    dim: Optional[int] = None,
    name: str = "x",
) -> np.ndarray:
    """Return *x* as a finite, 1-D float64 array.

    Raises
    ------
    InputShapeError:
        If *dim* is given and the flattened length differs.
    ConfigError:
        If any element is NaN or infinite.
    """
    arr = np.asarray(x, dtype=np.float64).reshape(-1)
    if dim is not None and arr.size != dim:
        raise InputShapeError(
            f"{name} has {arr.size} elements, expected {dim}"
        )
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} contains NaN or infinite values")
    return arr


def as_batch(X: ArrayLike, dim: int, name: str = "X") -> np.ndarray:
    """Return *X* as a finite ``(n, dim)`` float64 array."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise InputShapeError(
            f"{name} has shape {arr.shape}, expected (n, {dim})"
        )
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} contains NaN or infinite values")
    return arr


def frozen(arr: np.ndarray) -> np.ndarray:
    """Return a read-only float64 copy of *arr*."""
    out = np.array(arr, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out
