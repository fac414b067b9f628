"""Proper time, 4-velocity maps and point-particle dynamics in flat spacetime."""

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_simpson

from . import integrators
from .errors import NotTimelike, OrthogonalityViolated, SpeedNotSubluminal
from .minkowski import METRIC, inner4, lorentz_factor
from .worldline import ParticleState, Worldline

SPEED_OF_LIGHT = 299792458.0


@dataclass(frozen=True)
class ProperTimeTable:
    """Monotone map from a curve parameter to elapsed proper time."""

    param: np.ndarray
    s: np.ndarray

    def __call__(self, value):
        return np.interp(value, self.param, self.s)


def proper_time_table(curve: Callable, u1: float, u2: float, n: int, c: float,
                      derivative: Callable | None = None) -> ProperTimeTable:
    """Tabulate proper time along a parameterised path by composite Simpson.

    Parameters
    ----------
    curve : callable
        ``curve(u) -> x`` returning an event for each parameter value.
    u1, u2 : float
        Parameter range.
    n : int
        Number of intervals; rounded up to the next even number.
    c : float
        Speed of light.
    derivative : callable, optional
        ``dx/du``. Central differences of ``curve`` are used when omitted.

    Raises
    ------
    NotTimelike
        At the first node where the tangent is null or spacelike.
    """
    if n < 2:
        n = 2
    if n % 2:
        n += 1
    nodes = np.linspace(u1, u2, n + 1)
    if derivative is None:
        step = 1e-6 * max(abs(u2 - u1), 1e-300)

        def derivative(u):
            return (np.asarray(curve(u + step), dtype=float) - np.asarray(curve(u - step), dtype=float)) / (2 * step)

    rates = np.empty(n + 1)
    for i, u in enumerate(nodes):
        xdot = np.asarray(derivative(u), dtype=float)
        q = -inner4(xdot, xdot)
        tol = 1e-12 * max(1.0, float(np.dot(xdot, xdot)))
        if not q > tol:
            raise NotTimelike(f"path is not timelike at parameter u={u!r} (-<x', x'> = {q:.3e})")
        rates[i] = np.sqrt(q) / c
    s = cumulative_simpson(rates, x=nodes, initial=0.0)
    if not np.all(np.diff(s) > 0):
        raise NotTimelike("proper time failed to increase monotonically")
    return ProperTimeTable(nodes, s)


def four_velocity_from_coordinate_velocity(v, c: float) -> np.ndarray:
    """U = gamma (v, c)."""
    v = np.asarray(v, dtype=float)
    g = lorentz_factor(v, c)
    return np.append(g * v, g * c)


def coordinate_velocity_from_four_velocity(u, c: float) -> np.ndarray:
    """v = c U^i / U^4."""
    u = np.asarray(u, dtype=float)
    return c * u[:3] / u[3]


def newtonian_force_to_relativistic(f, v, c: float) -> np.ndarray:
    """Map a Newtonian force per unit rest mass to the relativistic 4-force.

    The spatial part is scaled by the Lorentz factor and the time part is
    fixed by orthogonality to the 4-velocity.
    """
    f = np.asarray(f, dtype=float)
    v = np.asarray(v, dtype=float)
    g = lorentz_factor(v, c)
    spatial = g * f
    return np.append(spatial, float(np.dot(spatial, v)) / c)


def relativistic_force_to_newtonian(force, v, c: float) -> np.ndarray:
    force = np.asarray(force, dtype=float)
    return force[:3] / lorentz_factor(v, c)


def orthogonal_time_component(spatial_force, u) -> float:
    """Time component that makes a 4-force orthogonal to ``u``."""
    spatial_force = np.asarray(spatial_force, dtype=float)
    u = np.asarray(u, dtype=float)
    return float(np.dot(spatial_force, u[:3]) / u[3])


def energy(m: float, v, c: float) -> float:
    """Total energy m c^2 gamma."""
    return m * c * c * lorentz_factor(v, c)


def flat_projection(c: float):
    """Rescale the velocity half of an (X, U) state onto the mass shell."""

    def project(y):
        u = y[4:]
        q = -(u[0] * u[0] + u[1] * u[1] + u[2] * u[2] - u[3] * u[3])
        if q <= 0:
            raise NotTimelike("4-velocity left the timelike cone during integration")
        y = y.copy()
        y[4:] = u * np.sqrt(c * c / q)
        return y

    return project


def integrate_relativistic(state0: ParticleState, force: Callable, ds: float, n: int, c: float,
                           method: str = "rk4", project: bool = False, rtol: float = 1e-10,
                           atol: float = 1e-10, orthogonality_tol: float = 1e-6) -> Worldline:
    """Integrate m d^2X/ds^2 = F(X, U) in flat spacetime.

    Parameters
    ----------
    state0 : ParticleState
        Initial event and normalised 4-velocity.
    force : callable
        ``force(x, u) -> F`` returning a contravariant 4-force.
    ds, n : float, int
        Proper-time step and step count.
    c : float
    method : {"rk4", "rkf45"}
    project : bool
        Rescale U back onto the mass shell after every step.

    Raises
    ------
    OrthogonalityViolated
        If the force has a component along U larger than
        ``orthogonality_tol * |F| |U|``.
    """
    state0.check_normalized(c)
    m = state0.m

    def rhs(s, y):
        x = y[:4]
        u = y[4:]
        f = np.asarray(force(x, u), dtype=float)
        par = abs(inner4(f, u))
        if par > orthogonality_tol * float(np.linalg.norm(f)) * float(np.linalg.norm(u)):
            raise OrthogonalityViolated(f"force has component {par:.3e} along the 4-velocity")
        return np.concatenate((u, f / m))

    y0 = np.concatenate((state0.x, state0.u))
    proj = flat_projection(c) if project else None
    s, ys = integrators.integrate(rhs, y0, ds, n, method=method, project=proj, rtol=rtol, atol=atol)
    us = ys[:, 4:]
    res = (np.einsum("ij,jk,ik->i", us, METRIC, us) + c * c) / (c * c)
    return Worldline(s, ys[:, :4], us, res, c, m, state0.e, method, ds)


def check_subluminal(v, c: float):
    v = np.asarray(v, dtype=float)
    if not float(np.dot(v, v)) < c * c:
        raise SpeedNotSubluminal("speed must be strictly less than c")
