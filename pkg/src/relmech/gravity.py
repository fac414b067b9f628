"""Linearised gravity: potentials, effective metrics and Christoffel symbols.

A Newtonian potential ``W`` is non-positive for attractive sources, so
``|W| = -W`` wherever the absolute value appears. The static metric is

    g_ij = (1 - 2W/c^2) delta_ij,   g_44 = -(1 + 2W/c^2),   g_i4 = 0.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import SingularMetric, WeakFieldViolated
from .minkowski import METRIC

PHI_MAX = 0.5


def _spatial(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[:3]


@dataclass(frozen=True)
class NewtonianPotential:
    """Static potential W(x) in m^2/s^2 together with its gradient.

    Both callables take a spatial point (a full event is also accepted; only
    its first three components are read).
    """

    value: Callable
    gradient: Callable
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __call__(self, x) -> float:
        return float(self.value(_spatial(x)))

    def grad(self, x) -> np.ndarray:
        return np.asarray(self.gradient(_spatial(x)), dtype=float)

    def check_weak(self, x, c: float) -> float:
        w = self(x)
        if not 2.0 * abs(w) / (c * c) < 1.0:
            raise WeakFieldViolated(f"2|W|/c^2 = {2 * abs(w) / (c * c):.4g} is not below 1 at {np.asarray(x)[:3]}")
        return w


def point_mass(GM: float, center=(0.0, 0.0, 0.0)) -> NewtonianPotential:
    """W = -GM / |x - center|."""
    center = np.asarray(center, dtype=float)

    def value(x):
        d = x - center
        return -GM / np.sqrt(d @ d)

    def gradient(x):
        d = x - center
        r = np.sqrt(d @ d)
        return GM * d / (r * r * r)

    return NewtonianPotential(value, gradient, "point_mass", {"GM": GM, "center": tuple(float(v) for v in center)})


def uniform(g) -> NewtonianPotential:
    """Potential of a uniform gravitational acceleration ``g`` (W = -g.x)."""
    g = np.asarray(g, dtype=float)
    return NewtonianPotential(lambda x: -float(g @ x), lambda x: -g.copy(), "uniform", {"g": tuple(g)})


def zero() -> NewtonianPotential:
    return NewtonianPotential(lambda x: 0.0, lambda x: np.zeros(3), "zero", {})


def from_function(value: Callable, gradient: Callable | None = None, h: float = 1e-4) -> NewtonianPotential:
    """Wrap a user potential; the gradient defaults to central differences."""
    if gradient is None:
        def gradient(x):
            out = np.empty(3)
            for k in range(3):
                xp = np.array(x, dtype=float)
                xm = xp.copy()
                xp[k] += h
                xm[k] -= h
                out[k] = (float(value(xp)) - float(value(xm))) / (2 * h)
            return out
    return NewtonianPotential(value, gradient)


def laplace_residual(W: NewtonianPotential, x, h: float = 1e-4) -> float:
    """Central-difference Laplacian of W; zero outside sources."""
    x = _spatial(x).copy()
    w0 = W(x)
    total = 0.0
    for k in range(3):
        xp = x.copy()
        xm = x.copy()
        xp[k] += h
        xm[k] -= h
        total += (W(xp) - 2.0 * w0 + W(xm)) / (h * h)
    return total


def trace_reverse(phi) -> np.ndarray:
    """phi - (1/2) d tr(phi), with the trace taken with the flat metric."""
    phi = np.asarray(phi, dtype=float)
    tr = float(np.einsum("ab,ab->", METRIC, phi))
    return phi - 0.5 * METRIC * tr


@dataclass(frozen=True)
class GravPotential:
    """Oracle for the symmetric potential phi_mn(x), gated to the weak-field regime."""

    phi: Callable
    gradient: Callable | None = None  # x -> d phi_mn / d x^l, shape (4, 4, 4)
    phi_max: float = PHI_MAX

    def __call__(self, x) -> np.ndarray:
        p = np.asarray(self.phi(np.asarray(x, dtype=float)), dtype=float)
        if p.shape != (4, 4) or not np.array_equal(p, p.T):
            raise ValueError("potential must be an exactly symmetric 4x4 array")
        if not float(np.max(np.abs(p))) < self.phi_max:
            raise WeakFieldViolated(f"max |phi| = {np.max(np.abs(p)):.4g} exceeds {self.phi_max}")
        return p


def christoffel_from_derivatives(g_inv, dg) -> np.ndarray:
    """Gamma^a_bc = (1/2) g^al (d_b g_cl + d_c g_lb - d_l g_bc).

    ``dg[l, m, n]`` holds d g_mn / d x^l. The result is symmetrised in its
    lower pair so the symmetry holds exactly.
    """
    k = dg + dg.transpose(2, 0, 1) - dg.transpose(1, 2, 0)
    # k[b, c, l] = d_b g_cl + d_c g_lb - d_l g_bc
    gam = 0.5 * np.einsum("al,bcl->abc", g_inv, k)
    return 0.5 * (gam + gam.transpose(0, 2, 1))


class EffectiveMetric:
    """Metric oracle with inverse, Christoffel symbols and geodesic acceleration.

    Parameters
    ----------
    g_fn : callable
        Event -> covariant 4x4 metric.
    provenance : str
        ``"flat"``, ``"from_phi"``, ``"from_static_W"`` or ``"custom"``.
    inverse_fn, christoffel_fn, acceleration_fn : callable, optional
        Analytic replacements for the numeric defaults.
    dg_fn : callable, optional
        Analytic metric derivatives ``dg[l, m, n]``.
    h : float
        Finite-difference step for numeric Christoffel symbols.
    """

    def __init__(self, g_fn, provenance="custom", inverse_fn=None, christoffel_fn=None, acceleration_fn=None,
                 dg_fn=None, h=1e-4, W=None, c=None):
        self._g = g_fn
        self.provenance = provenance
        self._inverse = inverse_fn
        self._christoffel = christoffel_fn
        self._acceleration = acceleration_fn
        self._dg = dg_fn
        self.h = h
        self.W = W
        self.c = c

    def __call__(self, x) -> np.ndarray:
        return self.g(x)

    def g(self, x) -> np.ndarray:
        return np.asarray(self._g(np.asarray(x, dtype=float)), dtype=float)

    def inverse(self, x) -> np.ndarray:
        if self._inverse is not None:
            return self._inverse(np.asarray(x, dtype=float))
        g = self.g(x)
        return checked_inverse(g)

    def christoffel(self, x, h=None) -> np.ndarray:
        if self._christoffel is not None and h is None:
            return self._christoffel(np.asarray(x, dtype=float))
        return christoffel_numeric(self, x, self.h if h is None else h)

    def metric_derivatives(self, x, h=None) -> np.ndarray:
        if self._dg is not None and h is None:
            return self._dg(np.asarray(x, dtype=float))
        return _metric_derivatives(self, x, self.h if h is None else h)

    def geodesic_acceleration(self, x, u) -> np.ndarray:
        """-Gamma^a_bc u^b u^c."""
        if self._acceleration is not None:
            return self._acceleration(x, u)
        gam = self.christoffel(x)
        return -np.einsum("abc,b,c->a", gam, u, u)

    def norm(self, x, u) -> float:
        """g(U, U)."""
        u = np.asarray(u, dtype=float)
        return float(u @ self.g(x) @ u)

    @classmethod
    def flat(cls) -> "EffectiveMetric":
        return cls(lambda x: METRIC.copy(), "flat", inverse_fn=lambda x: METRIC.copy(),
                   christoffel_fn=lambda x: np.zeros((4, 4, 4)), acceleration_fn=lambda x, u: np.zeros(4),
                   dg_fn=lambda x: np.zeros((4, 4, 4)))


def checked_inverse(g) -> np.ndarray:
    """Inverse of a Lorentzian metric, with signature and conditioning checks."""
    g = np.asarray(g, dtype=float)
    if not np.array_equal(g, g.T):
        raise SingularMetric("metric is not symmetric")
    det = float(np.linalg.det(g))
    if not abs(det) >= 1e-12:
        raise SingularMetric(f"|det g| = {abs(det):.3e} is below 1e-12")
    if det >= 0:
        raise SingularMetric("metric determinant is not negative (not Lorentzian)")
    inv = np.linalg.inv(g)
    inv = 0.5 * (inv + inv.T)
    err = float(np.max(np.abs(inv @ g - np.eye(4))))
    if err > 1e-12:
        raise SingularMetric(f"metric inverse is inaccurate ({err:.3e})")
    return inv


def metric_from_phi(phi: GravPotential, h: float = 1e-4) -> EffectiveMetric:
    """g = d + trace_reverse(phi), pointwise."""

    def g_fn(x):
        return METRIC + trace_reverse(phi(x))

    dg_fn = None
    if phi.gradient is not None:
        def dg_fn(x):
            dphi = np.asarray(phi.gradient(x), dtype=float)
            return np.stack([trace_reverse(d) for d in dphi])

    def christoffel_fn(x):
        return christoffel_from_derivatives(checked_inverse(g_fn(x)), dg_fn(x))

    return EffectiveMetric(g_fn, "from_phi", christoffel_fn=christoffel_fn if dg_fn else None, dg_fn=dg_fn, h=h)


def static_metric_from_W(W: NewtonianPotential, c: float) -> EffectiveMetric:
    """Static weak-field metric built from a Newtonian potential.

    Christoffel symbols and the geodesic acceleration use the exact
    derivatives of this metric.
    """
    c2 = c * c

    def g_fn(x):
        w = W.check_weak(x, c)
        a = 1.0 - 2.0 * w / c2
        return np.diag([a, a, a, -(1.0 + 2.0 * w / c2)])

    def inverse_fn(x):
        w = W.check_weak(x, c)
        a = 1.0 / (1.0 - 2.0 * w / c2)
        return np.diag([a, a, a, -1.0 / (1.0 + 2.0 * w / c2)])

    def dg_fn(x):
        gw = W.grad(x)
        out = np.zeros((4, 4, 4))
        for l in range(3):
            out[l, 0, 0] = out[l, 1, 1] = out[l, 2, 2] = -2.0 * gw[l] / c2
            out[l, 3, 3] = -2.0 * gw[l] / c2
        return out

    def christoffel_fn(x):
        return christoffel_static_closed_form(W, x, c, exact=True)

    def acceleration_fn(x, u):
        w = W.check_weak(x, c)
        gw = W.grad(x)
        us = u[:3]
        u4 = u[3]
        a = 1.0 / (c2 - 2.0 * w)
        ug = float(us @ gw)
        acc = np.empty(4)
        acc[:3] = -a * ((float(us @ us) + u4 * u4) * gw - 2.0 * ug * us)
        acc[3] = -2.0 * ug * u4 / (c2 + 2.0 * w)
        return acc

    return EffectiveMetric(g_fn, "from_static_W", inverse_fn=inverse_fn, christoffel_fn=christoffel_fn,
                           acceleration_fn=acceleration_fn, dg_fn=dg_fn, W=W, c=c)


def _metric_derivatives(metric: EffectiveMetric, x, h: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    dg = np.empty((4, 4, 4))
    for k in range(4):
        xp = x.copy()
        xm = x.copy()
        xp[k] += h
        xm[k] -= h
        dg[k] = (metric.g(xp) - metric.g(xm)) / (2.0 * h)
    return dg


def christoffel_numeric(metric: EffectiveMetric, x, h: float = 1e-4) -> np.ndarray:
    """Christoffel symbols from central differences of the metric oracle.

    Returns ``gam[a, b, c]`` = Gamma^a_bc.
    """
    g_inv = checked_inverse(metric.g(x))
    return christoffel_from_derivatives(g_inv, _metric_derivatives(metric, x, h))


def christoffel_static_closed_form(W: NewtonianPotential, x, c: float, exact: bool = False) -> np.ndarray:
    """Closed-form Christoffel symbols of the static metric.

    The spatial family and Gamma^i_44 are exact. For the mixed family
    Gamma^4_i4 the default returns the leading-order value dW/dx^i / c^2;
    with ``exact=True`` it carries the factor 1/(1 + 2W/c^2) that the
    metric actually implies.
    """
    c2 = c * c
    w = W.check_weak(x, c)
    gw = W.grad(x)
    pre = 1.0 / (c2 * (1.0 - 2.0 * w / c2))
    gam = np.zeros((4, 4, 4))
    eye = np.eye(3)
    gam[:3, :3, :3] = pre * (np.einsum("jk,i->ijk", eye, gw) - np.einsum("ik,j->ijk", eye, gw)
                             - np.einsum("ij,k->ijk", eye, gw))
    gam[:3, 3, 3] = pre * gw
    mixed = gw / c2
    if exact:
        mixed = mixed / (1.0 + 2.0 * w / c2)
    gam[3, :3, 3] = mixed
    gam[3, 3, :3] = mixed
    return gam


def physical_components(T, W: NewtonianPotential, x, c: float) -> np.ndarray:
    """Orthonormal-frame components of a vector in the static metric.

    Spatial parts scale by sqrt(1 + 2|W|/c^2), the time part by
    sqrt(1 - 2|W|/c^2).
    """
    T = np.asarray(T, dtype=float)
    w = W.check_weak(x, c)
    absw = -w
    out = T.copy()
    out[:3] = np.sqrt(1.0 + 2.0 * absw / (c * c)) * T[:3]
    out[3] = np.sqrt(1.0 - 2.0 * absw / (c * c)) * T[3]
    return out


def covariant_derivative_lower2(metric: EffectiveMetric, tensor_fn: Callable, x, h: float = 1e-4) -> np.ndarray:
    """nabla_a T_bc for a covariant rank-2 tensor oracle.

    Uses numeric Christoffel symbols of ``metric`` with the same step.
    Returns ``out[a, b, c]``.
    """
    x = np.asarray(x, dtype=float)
    dT = np.empty((4, 4, 4))
    for k in range(4):
        xp = x.copy()
        xm = x.copy()
        xp[k] += h
        xm[k] -= h
        dT[k] = (np.asarray(tensor_fn(xp), dtype=float) - np.asarray(tensor_fn(xm), dtype=float)) / (2.0 * h)
    gam = christoffel_numeric(metric, x, h)
    T = np.asarray(tensor_fn(x), dtype=float)
    return dT - np.einsum("lab,lc->abc", gam, T) - np.einsum("lac,bl->abc", gam, T)
