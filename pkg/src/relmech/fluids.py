"""Continuum dynamics: dust, charged dust, perfect fluid, plasma and viscous plasma.

Fields are analytic oracles of the event ``x = (x1, x2, x3, ct)``. Residual
evaluators differentiate them with central differences of step ``h`` in
every event coordinate, so time derivatives use a step of ``h / c`` in t.
Streamlines are integrated in proper time.

Sign convention: every momentum residual is written as
``inertia * u.grad(u) + P . (forces)`` so it vanishes on solutions; a
pressure gradient therefore shows up with a plus sign.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _fd, integrators
from .electromagnetism import as_covariant
from .errors import NotNormalized, ZeroDensity, ZeroInertia
from .gravity import EffectiveMetric, NewtonianPotential, static_metric_from_W
from .orbits import _norm_residuals, metric_projection
from .worldline import ParticleState, Worldline, normalized_velocity

TAU_NORM = 1e-9
RESIDUAL_COLUMNS = ("eq_tag", "x1", "x2", "x3", "x4", "h", "r1", "r2", "r3", "r4")


@dataclass(frozen=True)
class FluidState:
    """Pointwise fluid variables at one event."""

    rho: float
    p: float
    u: np.ndarray
    sigma: float = 0.0
    eta: float = 0.0
    zeta: float = 0.0

    def __post_init__(self):
        if self.rho < 0:
            raise ValueError(f"negative density {self.rho!r}")
        if self.eta < 0 or self.zeta < 0:
            raise ValueError("viscosities must be non-negative")

    def check_normalized(self, g, c: float, tol: float = TAU_NORM):
        res = abs(float(self.u @ g @ self.u) + c * c) / (c * c)
        if res > tol:
            raise NotNormalized(f"fluid 4-velocity normalisation residual {res:.3e} exceeds {tol:.0e}")


@dataclass
class FluidFieldSet:
    """Oracles for the fluid and the external fields.

    ``u`` returns the contravariant 4-velocity, ``faraday`` a FaradayTensor
    or covariant 4x4 array, ``grad_p`` (optional) the event gradient of p.
    Missing scalar oracles read as zero; a missing ``W`` means flat space.
    """

    rho: Callable
    u: Callable | None = None
    p: Callable | None = None
    sigma: Callable | None = None
    faraday: Callable | None = None
    W: NewtonianPotential | None = None
    eta: Callable | None = None
    zeta: Callable | None = None
    grad_p: Callable | None = None
    metric: EffectiveMetric | None = None
    _metrics: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_velocity(cls, rho, velocity, c: float, W=None, **kw) -> "FluidFieldSet":
        """Build u from a coordinate 3-velocity oracle, normalised in the external metric."""
        fs = cls(rho, None, W=W, **kw)
        metric = fs.metric_for(c)

        def u(x):
            return normalized_velocity(velocity(x), c, metric.g(x))

        fs.u = u
        return fs

    def metric_for(self, c: float) -> EffectiveMetric:
        if self.metric is not None:
            return self.metric
        if c not in self._metrics:
            self._metrics[c] = EffectiveMetric.flat() if self.W is None else static_metric_from_W(self.W, c)
        return self._metrics[c]

    def scalar(self, name: str, x) -> float:
        fn = getattr(self, name)
        return 0.0 if fn is None else float(fn(x))

    def velocity(self, x) -> np.ndarray:
        return np.asarray(self.u(x), dtype=float)

    def state_at(self, x, c: float, check: bool = True) -> FluidState:
        st = FluidState(self.scalar("rho", x), self.scalar("p", x), self.velocity(x), self.scalar("sigma", x),
                        self.scalar("eta", x), self.scalar("zeta", x))
        if check:
            st.check_normalized(self.metric_for(c).g(x), c)
        return st


@dataclass(frozen=True)
class ResidualVector:
    tag: str
    components: np.ndarray
    h: float
    x: np.ndarray

    def row(self) -> list[str]:
        comps = [repr(float(v)) for v in np.atleast_1d(self.components)]
        comps += [""] * (4 - len(comps))
        return [self.tag] + [repr(float(v)) for v in self.x] + [repr(float(self.h))] + comps


def projector(u, g, c: float) -> np.ndarray:
    """P^a_b = delta^a_b + u^a u_b / c^2 (u_b lowered with g)."""
    u = np.asarray(u, dtype=float)
    return np.eye(4) + np.outer(u, g @ u) / (c * c)


def convective_derivative(fields: FluidFieldSet, x, h: float, c: float) -> np.ndarray:
    """u^b nabla_b u^a with the external-metric connection."""
    x = np.asarray(x, dtype=float)
    u = fields.velocity(x)
    du = _fd.gradient(fields.velocity, x, h)
    return u @ du - fields.metric_for(c).geodesic_acceleration(x, u)


def pressure_force(fields: FluidFieldSet, x, h: float, c: float) -> np.ndarray:
    """d_b (p g^{ab})."""
    if fields.p is None:
        return np.zeros(4)
    metric = fields.metric_for(c)
    if fields.grad_p is not None:
        return _pressure_force_analytic(fields, metric, x)
    return _fd.divergence(lambda y: fields.scalar("p", y) * metric.inverse(y), x, h)


def _pressure_force_analytic(fields, metric, x):
    ginv = metric.inverse(x)
    dg = metric.metric_derivatives(x)
    d_ginv = -np.einsum("am,bmn,nb->a", ginv, dg, ginv)
    return ginv @ np.asarray(fields.grad_p(x), dtype=float) + fields.scalar("p", x) * d_ginv


def em_force(fields: FluidFieldSet, x, c: float) -> np.ndarray:
    """(sigma u^b / c) F_b^a, the charge-current term with J = sigma u."""
    if fields.sigma is None or fields.faraday is None:
        return np.zeros(4)
    u = fields.velocity(x)
    f = as_covariant(fields.faraday(x))
    return (fields.scalar("sigma", x) / c) * (fields.metric_for(c).inverse(x) @ (f.T @ u))


def viscous_stress(fields: FluidFieldSet, x, h: float, c: float) -> np.ndarray:
    """Viscous part of T^{ab}.

    -eta [Q^{as} d_s u^b + Q^{bs} d_s u^a] + (2/3 eta - zeta) Q^{ab} d_s u^s,
    with Q^{ab} = g^{ab} + u^a u^b / c^2.
    """
    x = np.asarray(x, dtype=float)
    u = fields.velocity(x)
    du = _fd.gradient(fields.velocity, x, h)  # du[s, b] = d_s u^b
    q = fields.metric_for(c).inverse(x) + np.outer(u, u) / (c * c)
    shear = q @ du
    eta = fields.scalar("eta", x)
    zeta = fields.scalar("zeta", x)
    return -eta * (shear + shear.T) + (2.0 / 3.0 * eta - zeta) * np.trace(du) * q


def viscous_force(fields: FluidFieldSet, x, h: float, c: float) -> np.ndarray:
    """d_b Sigma^{ab} for the viscous stress Sigma."""
    if fields.eta is None and fields.zeta is None:
        return np.zeros(4)
    return _fd.divergence(lambda y: viscous_stress(fields, y, h, c), x, h)


def _forces(fields, x, h, c, charged: bool, viscous: bool):
    f = pressure_force(fields, x, h, c)
    if charged:
        f = f + em_force(fields, x, c)
    if viscous:
        f = f + viscous_force(fields, x, h, c)
    return f


def _momentum(fields, x, h, c, tag, charged=False, viscous=False, pressure=True) -> ResidualVector:
    x = np.asarray(x, dtype=float)
    st = fields.state_at(x, c)
    conv = convective_derivative(fields, x, h, c)
    if not pressure:
        return ResidualVector(tag, st.rho * conv, h, x)
    inertia = st.rho + st.p / (c * c)
    P = projector(st.u, fields.metric_for(c).g(x), c)
    return ResidualVector(tag, inertia * conv + P @ _forces(fields, x, h, c, charged, viscous), h, x)


def euler_residual_dust(fields: FluidFieldSet, x, h: float, c: float) -> ResidualVector:
    """rho u^b nabla_b u^a: dust streamlines are geodesics of the external metric."""
    return _momentum(fields, x, h, c, "dust_euler", pressure=False)


def euler_residual_perfect_fluid(fields: FluidFieldSet, x, h: float, c: float) -> ResidualVector:
    """(rho + p/c^2) u.nabla u^a + P^a_g d_b(p g^{gb})."""
    return _momentum(fields, x, h, c, "perfect_euler")


def plasma_euler_residual(fields: FluidFieldSet, x, h: float, c: float) -> ResidualVector:
    """Perfect-fluid residual plus the projected charge-current force."""
    return _momentum(fields, x, h, c, "plasma_euler", charged=True)


def navier_stokes_residual(fields: FluidFieldSet, x, h: float, c: float) -> ResidualVector:
    """Plasma residual plus the projected divergence of the viscous stress."""
    return _momentum(fields, x, h, c, "navier_stokes", charged=True, viscous=True)


def _continuity(fields, x, h, c, charged=False, viscous=False, pressure=True) -> float:
    x = np.asarray(x, dtype=float)
    fields.state_at(x, c)
    if not pressure:
        return float(_fd.divergence(lambda y: fields.scalar("rho", y) * fields.velocity(y), x, h))
    c2 = c * c
    flux = _fd.divergence(lambda y: (fields.scalar("rho", y) + fields.scalar("p", y) / c2) * fields.velocity(y), x, h)
    u_low = fields.metric_for(c).g(x) @ fields.velocity(x)
    return float(flux - u_low @ _forces(fields, x, h, c, charged, viscous) / c2)


def continuity_residual_dust(fields: FluidFieldSet, x, h: float, c: float = 1.0) -> float:
    """d_v (rho u^v)."""
    return _continuity(fields, x, h, c, pressure=False)


def continuity_residual_dust_3plus1(fields: FluidFieldSet, x, h: float, c: float) -> float:
    """d/dt[rho gamma] + div(rho gamma v) with v = c u^i / u^4 (flat space)."""
    x = np.asarray(x, dtype=float)

    def density(y):
        u = fields.velocity(y)
        return fields.scalar("rho", y) * u[3] / c  # rho gamma

    def flux(y):
        u = fields.velocity(y)
        return fields.scalar("rho", y) * u[:3]  # rho gamma v

    spatial = sum(_fd.partial(flux, x, k, h)[k] for k in range(3))
    return float(c * _fd.partial(density, x, 3, h) + spatial)


def continuity_residual_perfect_fluid(fields: FluidFieldSet, x, h: float, c: float) -> float:
    """d_b[(rho + p/c^2) u^b] - (1/c^2) u_a d_b(p g^{ab})."""
    return _continuity(fields, x, h, c)


def plasma_continuity_residual(fields: FluidFieldSet, x, h: float, c: float) -> float:
    return _continuity(fields, x, h, c, charged=True)


def viscous_continuity_residual(fields: FluidFieldSet, x, h: float, c: float) -> float:
    return _continuity(fields, x, h, c, charged=True, viscous=True)


def theta_divergence_required(fields: FluidFieldSet, x, c: float) -> np.ndarray:
    """(rho + p/c^2) Gamma^a_bc u^b u^c: the divergence the interaction stress must supply."""
    x = np.asarray(x, dtype=float)
    st = fields.state_at(x, c)
    return -(st.rho + st.p / (c * c)) * fields.metric_for(c).geodesic_acceleration(x, st.u)


# static external field: 1/c^2 expansion of continuity


def _coordinate_velocity(fields, y, c):
    u = fields.velocity(y)
    return c * u[:3] / u[3]


def static_continuity_expansion_residual(fields: FluidFieldSet, x, h: float, c: float) -> tuple[float, float]:
    """Exact and O(1/c^2)-truncated continuity residuals in a static field.

    The exact form is written in t with D = sqrt(1 + 2W/c^2 - (1 - 2W/c^2)|v|^2/c^2):
    div[(rho + p/c^2) v / D] + d/dt[(rho + p/c^2)/D] - (1/c^2)(1 - 2W/c^2)(v/D).grad[p/(1 - 2W/c^2)].
    The truncated form is div(rho v) + d rho/dt minus the collected 1/c^2
    corrections. Their difference is O(1/c^4).
    """
    x = np.asarray(x, dtype=float)
    W = fields.W
    eps = 1.0 / (c * c)

    def w_at(y):
        return 0.0 if W is None else W(y)

    def dfac(y):
        v = _coordinate_velocity(fields, y, c)
        w = w_at(y)
        return math.sqrt(1.0 + 2.0 * w * eps - (1.0 - 2.0 * w * eps) * float(v @ v) * eps)

    def inertia(y):
        return fields.scalar("rho", y) + fields.scalar("p", y) * eps

    def div3(f):
        return sum(_fd.partial(f, x, k, h)[k] for k in range(3))

    def dt(f):
        return c * _fd.partial(f, x, 3, h)

    def grad3(f):
        return np.array([_fd.partial(f, x, k, h) for k in range(3)])

    v0 = _coordinate_velocity(fields, x, c)
    w0 = w_at(x)
    lhs = div3(lambda y: inertia(y) * _coordinate_velocity(fields, y, c) / dfac(y)) + dt(lambda y: inertia(y) / dfac(y))
    rhs = eps * (1.0 - 2.0 * w0 * eps) / dfac(x) * float(
        v0 @ grad3(lambda y: fields.scalar("p", y) / (1.0 - 2.0 * w_at(y) * eps)))
    exact = float(lhs - rhs)

    def bracket(y):
        v = _coordinate_velocity(fields, y, c)
        return fields.scalar("rho", y) * (w_at(y) - 0.5 * float(v @ v))

    newton = div3(lambda y: fields.scalar("rho", y) * _coordinate_velocity(fields, y, c)) + dt(
        lambda y: fields.scalar("rho", y))
    corr = (-fields.scalar("p", x) * div3(lambda y: _coordinate_velocity(fields, y, c))
            + div3(lambda y: bracket(y) * _coordinate_velocity(fields, y, c))
            - dt(lambda y: fields.scalar("p", y)) + dt(bracket))
    expanded = float(newton - eps * corr)
    return exact, expanded


# streamlines


def streamline_acceleration(fields: FluidFieldSet, x, u, c: float, kind: str, charge_ratio: float = 0.0,
                            h: float = 1e-6) -> np.ndarray:
    """d^2X/ds^2 on a streamline.

    ``kind`` is "charged_dust" (uses ``charge_ratio`` = sigma/rho of the
    parcel), "perfect" or "plasma" (density, pressure and charge read
    from the fields).
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    metric = fields.metric_for(c)
    acc = metric.geodesic_acceleration(x, u)
    g = metric.g(x)
    P = projector(u, g, c)
    if kind == "charged_dust":
        if fields.faraday is None or charge_ratio == 0.0:
            return acc
        f = as_covariant(fields.faraday(x))
        lorentz = (charge_ratio / c) * (metric.inverse(x) @ (f @ u))
        return acc + P @ lorentz
    rho = fields.scalar("rho", x)
    p = fields.scalar("p", x)
    inertia = rho + p / (c * c)
    if not inertia > 0:
        raise ZeroInertia(f"rho + p/c^2 = {inertia!r} at {x}")
    force = pressure_force(fields, x, h, c)
    if kind == "plasma" and fields.sigma is not None and fields.faraday is not None:
        f = as_covariant(fields.faraday(x))
        force = force + (fields.scalar("sigma", x) / c) * (metric.inverse(x) @ (f.T @ u))
    elif kind not in ("perfect", "plasma"):
        raise ValueError(f"unknown streamline kind {kind!r}")
    return acc - P @ force / inertia


def _charge_ratio(parcel, fields) -> float:
    """sigma/rho, constant along a charged-dust streamline.

    Read from the fields at the start event when a charge-density oracle
    exists, otherwise from the parcel's ``e / m``.
    """
    if fields.sigma is None:
        return parcel.e / parcel.m
    rho = fields.scalar("rho", parcel.x)
    if not rho > 0:
        raise ZeroDensity(f"proper density {rho!r} at the start event; charge ratio undefined")
    return fields.scalar("sigma", parcel.x) / rho


def fluid_streamline(parcel: ParticleState, fields: FluidFieldSet, ds: float, n: int, c: float, kind: str = "perfect",
                     method: str = "rk4", project: bool = False, rtol: float = 1e-10, atol: float = 1e-10,
                     h: float = 1e-6) -> Worldline:
    """Integrate a fluid parcel along its streamline.

    For charged dust only sigma/rho matters and it is constant along the
    streamline (see ``_charge_ratio``). Other
    kinds read density, pressure and charge from ``fields``; ``h`` is the
    pressure-gradient stencil when no ``grad_p`` oracle is given.
    """
    metric = fields.metric_for(c)
    parcel.check_normalized(c, metric.g(parcel.x))
    ratio = 0.0
    if kind == "charged_dust":
        ratio = _charge_ratio(parcel, fields)

    def rhs(s, y):
        return np.concatenate((y[4:], streamline_acceleration(fields, y[:4], y[4:], c, kind, ratio, h)))

    proj = metric_projection(metric, c) if project else None
    y0 = np.concatenate((parcel.x, parcel.u))
    s, ys = integrators.integrate(rhs, y0, ds, n, method=method, project=proj, rtol=rtol, atol=atol)
    xs, us = ys[:, :4], ys[:, 4:]
    return Worldline(s, xs, us, _norm_residuals(metric, xs, us, c), c, parcel.m, parcel.e, method, ds)


def charged_dust_streamline(parcel: ParticleState, fields: FluidFieldSet, ds: float, n: int, c: float,
                            **kw) -> Worldline:
    return fluid_streamline(parcel, fields, ds, n, c, "charged_dust", **kw)


def perfect_fluid_streamline(parcel: ParticleState, fields: FluidFieldSet, ds: float, n: int, c: float,
                             **kw) -> Worldline:
    return fluid_streamline(parcel, fields, ds, n, c, "perfect", **kw)


def plasma_streamline(parcel: ParticleState, fields: FluidFieldSet, ds: float, n: int, c: float,
                      **kw) -> Worldline:
    return fluid_streamline(parcel, fields, ds, n, c, "plasma", **kw)


# static external field: t-parameterised diagnostics


def three_acceleration(u, a, c: float) -> np.ndarray:
    """dV/dt from U and dU/ds, with V = c U^i / U^4 and dt = dx^4 / c."""
    u = np.asarray(u, dtype=float)
    a = np.asarray(a, dtype=float)
    return (c * c / u[3]) * (a[:3] / u[3] - u[:3] * a[3] / u[3] ** 2)


def _grad_p_spatial(fields, x, h, c):
    if fields.p is None:
        return np.zeros(3), 0.0
    if fields.grad_p is not None:
        gp = np.asarray(fields.grad_p(x), dtype=float)
    else:
        gp = _fd.gradient(lambda y: fields.scalar("p", y), x, h)
    return gp[:3], c * gp[3]


def newtonian_euler_defect(fields: FluidFieldSet, x, V, dVdt, c: float, h: float = 1e-6) -> np.ndarray:
    """rho (dV/dt + grad W) + grad p, zero for a Newtonian fluid."""
    gp, _ = _grad_p_spatial(fields, x, h, c)
    gw = np.zeros(3) if fields.W is None else fields.W.grad(x)
    return fields.scalar("rho", x) * (np.asarray(dVdt) + gw) + gp


def euler_correction_bundle(fields: FluidFieldSet, x, V, dVdt, c: float, h: float = 1e-6) -> np.ndarray:
    """The collected 1/c^2 corrections that the Newtonian Euler defect must equal.

    -(1/c^2){rho[(V.a - 3 V.grad W) V + (2W + |V|^2) grad W] + p (a + 3 grad W)
    + (4W - |V|^2) grad p + (V.grad p + dp/dt) V} with a = dV/dt.
    """
    V = np.asarray(V, dtype=float)
    a = np.asarray(dVdt, dtype=float)
    gp, dpdt = _grad_p_spatial(fields, x, h, c)
    w = 0.0 if fields.W is None else fields.W(x)
    gw = np.zeros(3) if fields.W is None else fields.W.grad(x)
    rho = fields.scalar("rho", x)
    p = fields.scalar("p", x)
    vv = float(V @ V)
    total = (rho * ((float(V @ a) - 3.0 * float(V @ gw)) * V + (2.0 * w + vv) * gw)
             + p * (a + 3.0 * gw) + (4.0 * w - vv) * gp + (float(V @ gp) + dpdt) * V)
    return -total / (c * c)


def residual_rows(residuals) -> str:
    """CSV text for a sequence of ResidualVector records."""
    lines = [",".join(RESIDUAL_COLUMNS)]
    lines += [",".join(r.row()) for r in residuals]
    return "\n".join(lines) + "\n"
