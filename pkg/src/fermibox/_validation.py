"""Small input checks shared by the public functions."""
import numpy as np


def check_positive(value, name):
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return value


def check_finite(values, name):
    arr = np.asarray(values)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


def check_upper_half(k, name="k"):
    if np.any(np.imag(k) < 0):
        raise ValueError(f"{name} must satisfy Im {name} >= 0")
    return k


def check_matrix(m, name, shape=(2, 2)):
    arr = np.asarray(m, dtype=complex)
    if arr.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
    check_finite(arr, name)
    return arr


def phys_sqrt(z):
    """Square root on the branch with Im sqrt(z) >= 0.

    On the positive real axis this is the boundary value from above.
    """
    w = np.sqrt(np.asarray(z, dtype=complex))
    return np.where(w.imag < 0, -w, w) if np.ndim(w) else (-w if w.imag < 0 else w)
