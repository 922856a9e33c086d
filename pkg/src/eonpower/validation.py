"""Input validation helpers shared by the estimators and loaders.

Modeled on sklearn's check_* conventions: each helper either returns the
validated (possibly converted) value or raises ValueError naming the field.
"""
import numbers

import numpy as np


def check_scalar(value, name, low=None, high=None, inclusive=True):
    """Validate a real scalar, optionally against bounds."""
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise ValueError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not np.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    if low is not None:
        if inclusive and value < low:
            raise ValueError(f"{name} must be >= {low}, got {value}")
        if not inclusive and value <= low:
            raise ValueError(f"{name} must be > {low}, got {value}")
    if high is not None:
        if inclusive and value > high:
            raise ValueError(f"{name} must be <= {high}, got {value}")
        if not inclusive and value >= high:
            raise ValueError(f"{name} must be < {high}, got {value}")
    return value


def check_int(value, name, low=None):
    """Validate an integer, optionally with a lower bound."""
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if low is not None and value < low:
        raise ValueError(f"{name} must be >= {low}, got {value}")
    return value


def check_power_vector(p, n_channels=None, name="p"):
    """Validate a vector of linear launch powers (watts): finite, > 0."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {p.shape}")
    if n_channels is not None and p.shape[0] != n_channels:
        raise ValueError(
            f"{name} must have length {n_channels}, got {p.shape[0]}")
    if not np.all(np.isfinite(p)):
        raise ValueError(f"{name} must be finite")
    if np.any(p <= 0):
        raise ValueError(f"{name} must be strictly positive (linear watts)")
    return p


def check_choice(value, name, choices):
    """Validate a categorical option."""
    if value not in choices:
        raise ValueError(
            f"{name} must be one of {sorted(choices)}, got {value!r}")
    return value


def check_seed(seed, name="seed"):
    """Validate an RNG seed (None or a nonnegative integer)."""
    if seed is None:
        return None
    return check_int(seed, name, low=0)
