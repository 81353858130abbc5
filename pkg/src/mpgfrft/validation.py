"""Input validation helpers used across the package."""

import numpy as np

from .errors import InvalidParameterError


def as_vector(x, n=None, name="x", dtype=None):
    """Coerce to a 1-D ndarray, optionally checking its length."""
    arr = np.asarray(x, dtype=dtype)
    if arr.ndim != 1:
        raise InvalidParameterError(f"{name} must be 1-D, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise InvalidParameterError(f"{name} must have length {n}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr.view(float) if arr.dtype.kind == "c" else arr)):
        raise InvalidParameterError(f"{name} contains non-finite entries")
    return arr


def as_square_matrix(m, n=None, name="matrix"):
    arr = np.asarray(m)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidParameterError(f"{name} must be square, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise InvalidParameterError(f"{name} must be {n}x{n}, got {arr.shape[0]}x{arr.shape[1]}")
    return arr


def check_ratio(r, name="r"):
    r = float(r)
    if not 0 < r <= 1:
        raise InvalidParameterError(f"{name} must lie in (0, 1], got {r}")
    return r


def check_positive_int(v, name, minimum=1):
    v = int(v)
    if v < minimum:
        raise InvalidParameterError(f"{name} must be >= {minimum}, got {v}")
    return v


def as_order_vector(a, n):
    """Expand a scalar or per-node order specification to length n."""
    a = np.asarray(a, dtype=float)
    if a.ndim == 0:
        a = np.full(n, float(a))
    return as_vector(a, n, name="order vector")


def expand_blocks(values, n):
    """Expand per-block values to a length-n vector; the last block absorbs the remainder."""
    values = np.asarray(values, dtype=float).ravel()
    b = len(values)
    if b > n:
        raise InvalidParameterError(f"more blocks ({b}) than entries ({n})")
    size = n // b
    out = np.empty(n)
    for i, v in enumerate(values):
        lo = i * size
        hi = (i + 1) * size if i < b - 1 else n
        out[lo:hi] = v
    return out
