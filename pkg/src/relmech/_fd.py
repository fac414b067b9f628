"""Central finite differences on array-valued oracles.

Every helper takes an oracle ``f(x) -> array`` and returns second-order
accurate derivatives. The derivative index is always placed first.
"""

import numpy as np


def partial(f, x, axis, h):
    """Central difference of ``f`` along coordinate ``axis`` at ``x``."""
    x = np.asarray(x, dtype=float)
    xp = x.copy()
    xm = x.copy()
    xp[axis] += h
    xm[axis] -= h
    return (np.asarray(f(xp), dtype=float) - np.asarray(f(xm), dtype=float)) / (2.0 * h)


def gradient(f, x, h, axes=None):
    """Stack of partials: ``out[k, ...] = d f / d x^k``."""
    x = np.asarray(x, dtype=float)
    if axes is None:
        axes = range(x.size)
    return np.stack([partial(f, x, k, h) for k in axes])


def second_partial(f, x, axis, h):
    """Three-point second derivative along ``axis``."""
    x = np.asarray(x, dtype=float)
    xp = x.copy()
    xm = x.copy()
    xp[axis] += h
    xm[axis] -= h
    f0 = np.asarray(f(x), dtype=float)
    return (np.asarray(f(xp), dtype=float) - 2.0 * f0 + np.asarray(f(xm), dtype=float)) / (h * h)


def divergence(f, x, h, axes=None):
    """Contract the derivative index with the first output index: d_k f^k."""
    x = np.asarray(x, dtype=float)
    if axes is None:
        axes = range(x.size)
    total = None
    for k in axes:
        term = partial(f, x, k, h)[k]
        total = term if total is None else total + term
    return total


def fit_order(hs, errors):
    """Least-squares slope of log(error) against log(h)."""
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    slope, _ = np.polyfit(np.log(hs), np.log(errors), 1)
    return float(slope)
