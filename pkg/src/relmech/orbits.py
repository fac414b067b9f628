"""Geodesic motion in effective metrics and the planetary-orbit pipeline."""

import math
from dataclasses import dataclass

import numpy as np

from . import integrators
from .errors import InsufficientOrbits, NotEquatorial, NotTimelike
from .gravity import EffectiveMetric, NewtonianPotential, point_mass, static_metric_from_W
from .worldline import ParticleState, Worldline, normalized_velocity

ARCSEC_PER_RAD = 180.0 / math.pi * 3600.0
SECONDS_PER_CENTURY = 36525.0 * 86400.0


def metric_projection(metric: EffectiveMetric, c: float):
    """Rescale U onto g(U, U) = -c^2 at the current event."""

    def project(y):
        q = -metric.norm(y[:4], y[4:])
        if q <= 0:
            raise NotTimelike("4-velocity left the timelike cone during integration")
        y = y.copy()
        y[4:] *= math.sqrt(c * c / q)
        return y

    return project


def _point_mass_rhs(GM: float, c: float):
    """Scalar-arithmetic geodesic right-hand side for a point mass at the origin.

    Equivalent to the exact static-metric Christoffel contraction, written
    without small-array overhead because it dominates orbit run time.
    """
    c2 = c * c
    sqrt = math.sqrt

    def rhs(s, y):
        x1, x2, x3 = y[0], y[1], y[2]
        u1, u2, u3, u4 = y[4], y[5], y[6], y[7]
        r2 = x1 * x1 + x2 * x2 + x3 * x3
        r = sqrt(r2)
        w = -GM / r
        k = GM / (r2 * r)
        g1, g2, g3 = k * x1, k * x2, k * x3
        a = 1.0 / (c2 - 2.0 * w)
        ug = u1 * g1 + u2 * g2 + u3 * g3
        uu = u1 * u1 + u2 * u2 + u3 * u3 + u4 * u4
        return np.array((
            u1, u2, u3, u4,
            -a * (uu * g1 - 2.0 * ug * u1),
            -a * (uu * g2 - 2.0 * ug * u2),
            -a * (uu * g3 - 2.0 * ug * u3),
            -2.0 * ug * u4 / (c2 + 2.0 * w),
        ))

    return rhs


def _static_projection(GM: float, c: float):
    c2 = c * c

    def project(y):
        r = math.sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2])
        w = -GM / r
        q = (1.0 + 2.0 * w / c2) * y[7] * y[7] - (1.0 - 2.0 * w / c2) * (y[4] * y[4] + y[5] * y[5] + y[6] * y[6])
        if q <= 0:
            raise NotTimelike("4-velocity left the timelike cone during integration")
        y = y.copy()
        y[4:] *= math.sqrt(c2 / q)
        return y

    return project


def _norm_residuals(metric: EffectiveMetric, xs, us, c: float) -> np.ndarray:
    if metric.provenance == "from_static_W":
        W = metric.W
        w = np.array([W(x) for x in xs])
        c2 = c * c
        q = (1.0 - 2.0 * w / c2) * np.einsum("ij,ij->i", us[:, :3], us[:, :3]) - (1.0 + 2.0 * w / c2) * us[:, 3] ** 2
        return (q + c2) / c2
    return np.array([(metric.norm(x, u) + c * c) / (c * c) for x, u in zip(xs, us)])


def integrate_geodesic(metric: EffectiveMetric, state0: ParticleState, ds: float, n: int, c: float,
                       method: str = "rk4", project: bool = False, rtol: float = 1e-10, atol: float = 1e-10,
                       norm_tol: float = 1e-9) -> Worldline:
    """Integrate d^2X/ds^2 + Gamma^a_bc U^b U^c = 0.

    Parameters
    ----------
    metric : EffectiveMetric
    state0 : ParticleState
        Must satisfy g(U, U) = -c^2 within ``norm_tol`` relative.
    ds, n : float, int
        Proper-time step and step count.
    c : float
    method : {"rk4", "rkf45"}
    project : bool
        Rescale U onto the mass shell after every accepted step.
    """
    state0.check_normalized(c, metric.g(state0.x), norm_tol)
    W = metric.W
    if metric.provenance == "from_static_W" and W is not None and W.name == "point_mass" \
            and not np.any(W.params.get("center", ())):
        GM = W.params["GM"]
        rhs = _point_mass_rhs(GM, c)
        proj = _static_projection(GM, c) if project else None
    else:
        def rhs(s, y):
            return np.concatenate((y[4:], metric.geodesic_acceleration(y[:4], y[4:])))
        proj = metric_projection(metric, c) if project else None
    y0 = np.concatenate((state0.x, state0.u))
    s, ys = integrators.integrate(rhs, y0, ds, n, method=method, project=proj, rtol=rtol, atol=atol)
    xs, us = ys[:, :4], ys[:, 4:]
    return Worldline(s, xs, us, _norm_residuals(metric, xs, us, c), c, state0.m, state0.e, method, ds)


@dataclass(frozen=True)
class FirstIntegrals:
    """Conserved energy (m^2/s^2) and angular momentum (m^2/s) per unit mass."""

    energy: float
    angular_momentum: float


def _check_equatorial(x, u, tol: float = 1e-9):
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    r = float(np.linalg.norm(x[:3]))
    speed = float(np.linalg.norm(u[:3]))
    if r > 0 and abs(x[2]) / r > tol:
        raise NotEquatorial(f"|z|/r = {abs(x[2]) / r:.3e} exceeds {tol:.0e}")
    if speed > 0 and abs(u[2]) / speed > tol:
        raise NotEquatorial(f"|u_z|/|u| = {abs(u[2]) / speed:.3e} exceeds {tol:.0e}")


def energy_integral(x, u, W: NewtonianPotential, c: float) -> float:
    """c (1 + 2W/c^2) U^4, which reduces to c^2 + v^2/2 + W for slow motion."""
    w = W.check_weak(x, c)
    return c * (1.0 + 2.0 * w / (c * c)) * float(u[3])


def angular_momentum_integral(x, u, W: NewtonianPotential, c: float) -> float:
    """(1 - 2W/c^2)(x u^y - y u^x), i.e. r^2 (1 + 2GM/(c^2 r)) dphi/ds for a point mass."""
    w = W.check_weak(x, c)
    return (1.0 - 2.0 * w / (c * c)) * (float(x[0]) * float(u[1]) - float(x[1]) * float(u[0]))


def static_first_integrals(state: ParticleState, W: NewtonianPotential, c: float,
                           equatorial_tol: float = 1e-9) -> FirstIntegrals:
    """Energy and angular-momentum integrals of equatorial motion in a static field.

    Raises
    ------
    NotEquatorial
        When the state leaves the z = 0 plane by more than ``equatorial_tol``
        (relative to r for position and |u| for velocity).
    """
    _check_equatorial(state.x, state.u, equatorial_tol)
    return FirstIntegrals(energy_integral(state.x, state.u, W, c), angular_momentum_integral(state.x, state.u, W, c))


def first_integral_series(w: Worldline, W: NewtonianPotential, c: float):
    """Energy and angular momentum at every sample of a worldline."""
    c2 = c * c
    wv = np.array([W(x) for x in w.x])
    eps = c * (1.0 + 2.0 * wv / c2) * w.u[:, 3]
    h = (1.0 - 2.0 * wv / c2) * (w.x[:, 0] * w.u[:, 1] - w.x[:, 1] * w.u[:, 0])
    return eps, h


def lagrangian(x, u, W: NewtonianPotential, c: float) -> float:
    """L = (1/2)(1 + 2|W|/c^2)|u|^2 - (1/2)(1 - 2|W|/c^2)(u^4)^2 per unit mass."""
    absw = -W.check_weak(x, c)
    u = np.asarray(u, dtype=float)
    c2 = c * c
    return 0.5 * (1.0 + 2.0 * absw / c2) * float(u[:3] @ u[:3]) - 0.5 * (1.0 - 2.0 * absw / c2) * float(u[3]) ** 2


def euler_lagrange_residual(w: Worldline, W: NewtonianPotential, c: float) -> np.ndarray:
    """dL/dx^a - d/ds(dL/du^a) along a uniformly sampled worldline.

    The s-derivative uses central differences over samples, so the residual
    is O(ds^2). Returns an array of shape (len(w) - 2, 4) for interior samples.
    """
    c2 = c * c
    xs, us = w.x, w.u
    wv = np.array([W(x) for x in xs])
    gw = np.array([W.grad(x) for x in xs])
    # momenta p_a = g_ab u^b
    p = us.copy()
    p[:, :3] *= (1.0 - 2.0 * wv / c2)[:, None]
    p[:, 3] *= -(1.0 + 2.0 * wv / c2)
    # dL/dx^i = (1/2) d_i g_ab u^a u^b = -(|u|^2 + (u^4)^2) d_i W / c^2
    dl = np.zeros_like(us)
    dl[:, :3] = -gw * ((np.einsum("ij,ij->i", us[:, :3], us[:, :3]) + us[:, 3] ** 2) / c2)[:, None]
    ds = np.diff(w.s)
    dpds = (p[2:] - p[:-2]) / (ds[1:] + ds[:-1])[:, None]
    return dl[1:-1] - dpds


def orbit_equation_residual(y, yp, GM: float, h: float, eps: float, c: float) -> float:
    """LHS - RHS of the first-order orbit equation in y = 1/r.

    ((1 - a)/(1 + a)) (y'^2 + y^2) + (c^2/h^2)(1 - a) - eps^2/(h^2 c^2),
    with a = 2 GM y / c^2.
    """
    c2 = c * c
    a = 2.0 * GM * y / c2
    return (1.0 - a) / (1.0 + a) * (yp * yp + y * y) + c2 / (h * h) * (1.0 - a) - eps * eps / (h * h * c2)


def orbit_equation_scale(h: float, eps: float, c: float) -> float:
    """Magnitude used to make the orbit-equation residual relative."""
    return eps * eps / (h * h * c * c)


def orbit_y_series(w: Worldline, GM: float, h: float, c: float):
    """(y, dy/dphi) along an equatorial worldline."""
    x, yv = w.x[:, 0], w.x[:, 1]
    ux, uy = w.u[:, 0], w.u[:, 1]
    r = np.hypot(x, yv)
    ur = (x * ux + yv * uy) / r
    uphi = (x * uy - yv * ux) / (r * r)
    # dy/dphi = -(1/r^2) dr/dphi
    return 1.0 / r, -ur / (r * r * uphi)


def perihelion_shift_closed_form(GM: float, h: float, c: float) -> float:
    """8 pi (GM / (c h))^2 radians per revolution."""
    return 8.0 * math.pi * (GM / (c * h)) ** 2


def kepler_angular_momentum(GM: float, a: float, e: float) -> float:
    return math.sqrt(GM * a * (1.0 - e * e))


def kepler_period(GM: float, a: float) -> float:
    return 2.0 * math.pi * math.sqrt(a ** 3 / GM)


def revolutions_per_century(GM: float, a: float) -> float:
    return SECONDS_PER_CENTURY / kepler_period(GM, a)


def time_dilation_factor(state: ParticleState, W: NewtonianPotential, c: float) -> float:
    """ds/dt = sqrt(1 - 2|W|/c^2 - (1 + 2|W|/c^2)|v|^2/c^2) with v = c U^i / U^4."""
    absw = -W.check_weak(state.x, c)
    v = c * state.u[:3] / state.u[3]
    c2 = c * c
    rad = 1.0 - 2.0 * absw / c2 - (1.0 + 2.0 * absw / c2) * float(v @ v) / c2
    if not rad > 0:
        raise NotTimelike(f"time-dilation radicand {rad:.3e} is not positive")
    return math.sqrt(rad)


@dataclass(frozen=True)
class OrbitConfig:
    """Orbit about a point mass at the origin, in the z = 0 plane.

    Either give Kepler elements (``a``, ``e``; the run starts at perihelion
    on the x axis) or initial polar data (``r0``, ``rdot``, ``phidot``),
    in which case the semi-major axis used for step sizing comes from the
    Newtonian vis-viva relation.
    """

    GM: float
    a: float | None = None
    e: float = 0.0
    c: float = 299792458.0
    r0: float | None = None
    rdot: float = 0.0
    phidot: float | None = None
    revolutions: float = 50.0
    steps_per_rev: int = 2000
    method: str = "rk4"
    project: bool = True
    rtol: float = 1e-10
    atol: float = 1e-10

    def __post_init__(self):
        if not self.GM > 0:
            raise ValueError("GM must be positive")
        if self.phidot is None:
            if self.a is None or not self.a > 0:
                raise ValueError("semi-major axis must be positive")
            if not 0.0 <= self.e < 1.0:
                raise ValueError("eccentricity must lie in [0, 1)")
        elif self.r0 is None or not self.r0 > 0:
            raise ValueError("initial radius must be positive")
        if self.steps_per_rev < 4 or not self.revolutions > 0:
            raise ValueError("need a positive revolution count and at least 4 steps per revolution")

    @property
    def potential(self) -> NewtonianPotential:
        return point_mass(self.GM)

    @property
    def metric(self) -> EffectiveMetric:
        return static_metric_from_W(self.potential, self.c)

    @property
    def semi_major_axis(self) -> float:
        if self.phidot is None:
            return self.a
        v2 = self.rdot ** 2 + (self.r0 * self.phidot) ** 2
        inv = 2.0 / self.r0 - v2 / self.GM
        if not inv > 0:
            raise ValueError("initial data is not a bound orbit")
        return 1.0 / inv

    def initial_state(self) -> ParticleState:
        """g-normalised initial state; raises ValueError for unbound data."""
        if self.phidot is None:
            r = self.a * (1.0 - self.e)
            vel = [0.0, math.sqrt(self.GM * (1.0 + self.e) / r), 0.0]
        else:
            r = self.r0
            vel = [self.rdot, r * self.phidot, 0.0]
        x = np.array([r, 0.0, 0.0, 0.0])
        u = normalized_velocity(vel, self.c, self.metric.g(x))
        eps = energy_integral(x, u, self.potential, self.c)
        if not eps < self.c ** 2:
            raise ValueError(f"energy integral {eps!r} is not below c^2; orbit is unbound")
        return ParticleState(x, u)

    @property
    def step(self) -> float:
        return kepler_period(self.GM, self.semi_major_axis) / self.steps_per_rev

    @property
    def n_steps(self) -> int:
        return int(round(self.revolutions * self.steps_per_rev))


def run_orbit(cfg: OrbitConfig) -> Worldline:
    """Integrate the configured orbit and attach the orbit CSV columns."""
    state = cfg.initial_state()
    w = integrate_geodesic(cfg.metric, state, cfg.step, cfg.n_steps, cfg.c, method=cfg.method,
                           project=cfg.project, rtol=cfg.rtol, atol=cfg.atol)
    return attach_orbit_columns(w, cfg.potential, cfg.c)


def attach_orbit_columns(w: Worldline, W: NewtonianPotential, c: float) -> Worldline:
    r = np.linalg.norm(w.x[:, :3], axis=1)
    phi = np.unwrap(np.arctan2(w.x[:, 1], w.x[:, 0]))
    eps, h = first_integral_series(w, W, c)
    orbit_index = np.floor((phi - phi[0]) / (2.0 * math.pi)).astype(np.int64)
    return w.with_columns(r=r, phi=phi, epsilon=eps, h_angmom=h, orbit_index=orbit_index)


@dataclass(frozen=True)
class PrecessionReport:
    perihelion_angles: np.ndarray
    shift_per_rev: float
    shift_stderr: float
    closed_form: float | None = None

    @property
    def relative_deviation(self) -> float | None:
        if self.closed_form is None or self.closed_form == 0:
            return None
        return (self.shift_per_rev - self.closed_form) / self.closed_form

    @property
    def n_perihelia(self) -> int:
        return int(len(self.perihelion_angles))

    def to_text(self) -> str:
        lines = [
            f"n_perihelia = {self.n_perihelia}",
            f"shift_per_rev = {self.shift_per_rev!r}",
            f"shift_stderr = {self.shift_stderr!r}",
        ]
        if self.closed_form is not None:
            lines.append(f"closed_form = {self.closed_form!r}")
            lines.append(f"relative_deviation = {self.relative_deviation!r}")
        lines.append("perihelion_angles = " + " ".join(repr(float(a)) for a in self.perihelion_angles))
        return "\n".join(lines) + "\n"


def locate_perihelia(w: Worldline):
    """Perihelion (s, phi) pairs from 3-point quadratic interpolation of r minima."""
    r = np.linalg.norm(w.x[:, :3], axis=1)
    phi = np.unwrap(np.arctan2(w.x[:, 1], w.x[:, 0]))
    idx = np.where((r[1:-1] < r[:-2]) & (r[1:-1] <= r[2:]))[0] + 1
    out_s, out_phi = [], []
    for i in idx:
        rm, r0, rp = r[i - 1], r[i], r[i + 1]
        curv = rm - 2.0 * r0 + rp
        off = 0.0 if curv <= 0 else 0.5 * (rm - rp) / curv
        pm, p0, pp = phi[i - 1], phi[i], phi[i + 1]
        out_phi.append(p0 + 0.5 * off * (pp - pm) + 0.5 * off * off * (pp - 2.0 * p0 + pm))
        sm, s0, sp = w.s[i - 1], w.s[i], w.s[i + 1]
        out_s.append(s0 + 0.5 * off * (sp - sm))
    return np.array(out_s), np.array(out_phi)


def measure_precession(w: Worldline, closed_form: float | None = None,
                       min_relative_amplitude: float = 1e-6) -> PrecessionReport:
    """Fit the perihelion advance per revolution from a sampled orbit.

    The angle of perihelion k, minus 2 pi k, is fitted linearly in k; the
    slope is the advance per revolution.

    Raises
    ------
    InsufficientOrbits
        With fewer than three perihelia, or when the orbit is circular to
        within ``min_relative_amplitude`` so that minima are meaningless. The
        default sits above the radius wobble left by RK4 at a few hundred
        steps per revolution.
    """
    r = np.linalg.norm(w.x[:, :3], axis=1)
    spread = (r.max() - r.min()) / (r.max() + r.min())
    if spread < min_relative_amplitude:
        raise InsufficientOrbits(f"orbit is circular to {spread:.2e}; perihelion undefined")
    _, phi_p = locate_perihelia(w)
    if len(phi_p) < 3:
        raise InsufficientOrbits(f"found {len(phi_p)} perihelion passages, need at least 3")
    k = np.arange(len(phi_p), dtype=float)
    omega = phi_p - 2.0 * math.pi * k
    coef, cov = np.polyfit(k, omega, 1, cov=True) if len(k) > 3 else (np.polyfit(k, omega, 1), np.zeros((2, 2)))
    return PrecessionReport(omega, float(coef[0]), float(math.sqrt(max(cov[0, 0], 0.0))), closed_form)


def precession_arcsec_per_century(shift_per_rev: float, GM: float, a: float) -> float:
    return shift_per_rev * ARCSEC_PER_RAD * revolutions_per_century(GM, a)
