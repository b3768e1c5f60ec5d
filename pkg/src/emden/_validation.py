"""Input validation helpers shared by the estimators and free functions."""

import math
import numbers

import numpy as np

from .errors import GridError, ParamError

# relative tolerance used when comparing an exponent with a threshold such as
# (n+2)/(n-2), which is not exactly representable for most n
THRESHOLD_RTOL = 1e-12


def check_dimension(n, minimum=3):
    if isinstance(n, bool) or not isinstance(n, numbers.Integral):
        if isinstance(n, numbers.Real) and float(n).is_integer():
            n = int(n)
        else:
            raise ParamError(f"dimension must be an integer, got {n!r}")
    n = int(n)
    if n < minimum:
        raise ParamError(f"dimension must be >= {minimum}, got {n}")
    return n


def check_positive(value, name, allow_inf=False):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ParamError(f"{name} must be a real number, got {value!r}") from None
    if math.isnan(value) or value <= 0 or (math.isinf(value) and not allow_inf):
        raise ParamError(f"{name} must be positive and finite, got {value!r}")
    return value


def check_window(window):
    try:
        lo, hi = (float(w) for w in window)
    except (TypeError, ValueError):
        raise ParamError(f"window must be a pair of fractions, got {window!r}") from None
    if not 0.0 <= lo < hi <= 1.0:
        raise ParamError(f"window fractions must satisfy 0 <= lo < hi <= 1, got {window!r}")
    return lo, hi


def same_threshold(p, threshold):
    return math.isclose(p, threshold, rel_tol=THRESHOLD_RTOL, abs_tol=0.0)


def check_grid(grid, name="grid", min_size=2):
    """Return ``grid`` as a 1-d float array, strictly increasing and finite."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < min_size:
        raise GridError(f"{name} must be 1-d with at least {min_size} nodes")
    if not np.all(np.isfinite(grid)):
        raise GridError(f"{name} contains non-finite nodes")
    if np.any(np.diff(grid) <= 0):
        raise GridError(f"{name} must be strictly increasing")
    if grid[0] < 0:
        raise GridError(f"{name} must be non-negative radii")
    return grid


def check_samples(values, grid, name="values"):
    values = np.asarray(values, dtype=float)
    if values.shape != grid.shape:
        raise GridError(f"{name} has shape {values.shape}, grid has {grid.shape}")
    if not np.all(np.isfinite(values)):
        raise GridError(f"{name} contains non-finite entries")
    return values
