"""Input validation helpers shared by the estimators, CLI and service."""

from __future__ import annotations

import numbers

import numpy as np

__all__ = [
    "check_points",
    "check_track_array",
    "check_vector",
    "check_positive",
    "check_in_range",
]


def check_points(x, name: str = "X") -> np.ndarray:
    """Coerce to a finite (n, 2) float array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"{name} must have shape (n, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_track_array(x, name: str = "X") -> np.ndarray:
    """Coerce to a finite (n, 4) float array of x, y, w_left, w_right rows."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise ValueError(
            f"{name} must have shape (n, 4) with columns x, y, w_left, w_right, got {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_vector(x, name: str, size: int | None = None) -> np.ndarray:
    """Coerce to a finite 1-D float array, optionally of fixed length."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if size is not None and arr.size != size:
        raise ValueError(f"{name} must have length {size}, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_positive(value, name: str, allow_none: bool = False) -> float | None:
    """Validate a strictly positive finite scalar."""
    if value is None:
        if allow_none:
            return None
        raise ValueError(f"{name} must be a positive number, got None")
    if not isinstance(value, numbers.Real) or not np.isfinite(float(value)):
        raise ValueError(f"{name} must be a finite number, got {value!r}")
    value = float(value)
    if value <= 0.0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def check_in_range(value, name: str, lo: float, hi: float) -> float:
    """Validate a finite scalar inside the closed interval [lo, hi]."""
    if not isinstance(value, numbers.Real) or not np.isfinite(float(value)):
        raise ValueError(f"{name} must be a finite number, got {value!r}")
    value = float(value)
    if not lo <= value <= hi:
        raise ValueError(f"{name} must be in [{lo}, {hi}], got {value}")
    return value
