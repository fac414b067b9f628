"""Explicit Runge-Kutta steppers for first-order systems y' = f(s, y).

Fixed-step RK4 is the default. The adaptive mode uses the Fehlberg 4(5)
pair with local extrapolation switched off (the 4th-order solution is kept).
"""

import numpy as np

from .errors import StepRejected

METHODS = ("rk4", "rkf45")

# Fehlberg 4(5) tableau
_A = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8.0, 3680 / 513, -845 / 4104),
    (-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40),
)
_C = (0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2)
_B4 = (25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0)
_B5 = (16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55)
_E = tuple(b5 - b4 for b4, b5 in zip(_B4, _B5))


def rk4_step(f, s, y, ds):
    k1 = f(s, y)
    k2 = f(s + 0.5 * ds, y + (0.5 * ds) * k1)
    k3 = f(s + 0.5 * ds, y + (0.5 * ds) * k2)
    k4 = f(s + ds, y + ds * k3)
    return y + (ds / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rkf45_step(f, s, y, ds):
    """One Fehlberg step; returns the 4th-order update and the error estimate."""
    ks = []
    for i in range(6):
        yi = y
        for a, k in zip(_A[i], ks):
            if a != 0.0:
                yi = yi + (ds * a) * k
        ks.append(f(s + _C[i] * ds, yi))
    y4 = y + ds * sum(b * k for b, k in zip(_B4, ks) if b != 0.0)
    err = ds * sum(e * k for e, k in zip(_E, ks) if e != 0.0)
    return y4, err


def integrate(f, y0, ds, n, method="rk4", project=None, rtol=1e-10, atol=1e-10, min_step=None, s0=0.0,
              callback=None):
    """Integrate ``n`` steps of nominal size ``ds``.

    Parameters
    ----------
    f : callable
        Right-hand side ``f(s, y) -> dy/ds``.
    y0 : array_like
        Initial state.
    ds, n : float, int
        Nominal step and number of steps. In adaptive mode the integration
        covers ``[s0, s0 + n ds]`` and records every accepted step.
    method : {"rk4", "rkf45"}
    project : callable, optional
        Applied to the state after every accepted step.
    rtol, atol : float
        Adaptive tolerances.
    min_step : float, optional
        Smallest step the adaptive controller may take before raising
        :class:`StepRejected`. Defaults to ``1e-12 * ds``.
    callback : callable, optional
        Called as ``callback(s, y)`` after each accepted step.

    Returns
    -------
    s : ndarray, shape (m,)
    ys : ndarray, shape (m, len(y0))
    """
    if not ds > 0:
        raise ValueError("step size must be positive")
    if n < 0:
        raise ValueError("number of steps must be non-negative")
    y = np.array(y0, dtype=float)
    if method == "rk4":
        ys = np.empty((n + 1, y.size))
        ys[0] = y
        s = s0
        for i in range(n):
            y = rk4_step(f, s, y, ds)
            s = s0 + (i + 1) * ds
            if project is not None:
                y = project(y)
            ys[i + 1] = y
            if callback is not None:
                callback(s, y)
        return s0 + ds * np.arange(n + 1), ys
    if method == "rkf45":
        return _adaptive(f, y, ds, n, project, rtol, atol, min_step, s0, callback)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def _adaptive(f, y, ds, n, project, rtol, atol, min_step, s0, callback):
    s_end = s0 + n * ds
    if min_step is None:
        min_step = 1e-12 * ds
    s = s0
    h = ds
    out_s = [s]
    out_y = [y.copy()]
    while s < s_end and not np.isclose(s, s_end, rtol=0.0, atol=1e-14 * abs(s_end) + 1e-300):
        h = min(h, s_end - s)
        y_new, err = rkf45_step(f, s, y, h)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        ratio = float(np.max(np.abs(err) / scale)) if err.size else 0.0
        if not np.isfinite(ratio):
            ratio = np.inf
        if ratio <= 1.0:
            s = s + h
            y = y_new if project is None else project(y_new)
            out_s.append(s)
            out_y.append(y.copy())
            if callback is not None:
                callback(s, y)
            grow = 5.0 if ratio == 0.0 else min(5.0, 0.9 * ratio ** -0.2)
            h = min(h * grow, ds)
        else:
            h = h * max(0.1, 0.9 * ratio ** -0.25)
            if h < min_step:
                raise StepRejected(f"step fell below {min_step:.3e} at s={s:.6g} (error ratio {ratio:.3e})")
    return np.array(out_s), np.array(out_y)
