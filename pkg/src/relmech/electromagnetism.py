"""Field tensor, Maxwell residuals, stress-energy and charged-particle motion.

Gaussian units. The covariant field tensor is laid out as

    F_12 = B3,  F_13 = -B2,  F_23 = B1,  F_i4 = E_i,

with F antisymmetric. Index raising uses the flat metric.
"""

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import integrators
from .kinematics import flat_projection
from .minkowski import METRIC
from .worldline import ParticleState, Worldline

FOUR_PI = 4.0 * np.pi

# independent index triples for the cyclic (homogeneous) Maxwell equations
_TRIPLES = ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))


@dataclass(frozen=True)
class FaradayTensor:
    """Antisymmetric field tensor stored through its electric and magnetic parts."""

    E: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        e = np.array(self.E, dtype=float).reshape(3)
        b = np.array(self.B, dtype=float).reshape(3)
        e.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "E", e)
        object.__setattr__(self, "B", b)

    @property
    def covariant(self) -> np.ndarray:
        e, b = self.E, self.B
        return np.array([
            [0.0, b[2], -b[1], e[0]],
            [-b[2], 0.0, b[0], e[1]],
            [b[1], -b[0], 0.0, e[2]],
            [-e[0], -e[1], -e[2], 0.0],
        ])

    @property
    def contravariant(self) -> np.ndarray:
        return METRIC @ self.covariant @ METRIC

    @property
    def mixed(self) -> np.ndarray:
        """F^a_b with the first index raised."""
        return METRIC @ self.covariant

    @classmethod
    def from_matrix(cls, f) -> "FaradayTensor":
        f = np.asarray(f, dtype=float)
        if f.shape != (4, 4):
            raise ValueError("field tensor must be 4x4")
        if not np.array_equal(f, -f.T):
            raise ValueError("field tensor must be exactly antisymmetric")
        return cls(*disassemble_faraday(f))


def assemble_faraday(E, B) -> FaradayTensor:
    return FaradayTensor(E, B)


def disassemble_faraday(f):
    """Recover (E, B) from a FaradayTensor or a covariant 4x4 array."""
    if isinstance(f, FaradayTensor):
        return f.E.copy(), f.B.copy()
    f = np.asarray(f, dtype=float)
    return f[:3, 3].copy(), np.array([f[1, 2], -f[0, 2], f[0, 1]])


def as_covariant(value) -> np.ndarray:
    """Covariant 4x4 array from either a FaradayTensor or an array."""
    if isinstance(value, FaradayTensor):
        return value.covariant
    return np.asarray(value, dtype=float)


def charge_current(j, sigma, c: float) -> np.ndarray:
    """J = (j, c sigma)."""
    return np.append(np.asarray(j, dtype=float), c * sigma)


def _dF(field_fn, x, h):
    """dF[l, m, n] = d F_mn / d x^l."""
    x = np.asarray(x, dtype=float)
    out = np.empty((4, 4, 4))
    for k in range(4):
        xp = x.copy()
        xm = x.copy()
        xp[k] += h
        xm[k] -= h
        out[k] = (as_covariant(field_fn(xp)) - as_covariant(field_fn(xm))) / (2.0 * h)
    return out


@dataclass(frozen=True)
class MaxwellResiduals:
    inhomogeneous: np.ndarray  # d_n F^mn - (4 pi / c) J^m
    cyclic: np.ndarray  # one entry per independent index triple
    continuity: float  # d_m J^m


def maxwell_residuals(field_fn: Callable, current_fn: Callable | None, x, h: float, c: float) -> MaxwellResiduals:
    """Central-difference residuals of the covariant Maxwell system at ``x``.

    ``current_fn`` may be None for vacuum.
    """
    x = np.asarray(x, dtype=float)
    dF = _dF(field_fn, x, h)
    dF_up = np.einsum("am,lmn,nb->lab", METRIC, dF, METRIC)
    div = np.einsum("nmn->m", dF_up)
    if current_fn is None:
        j = np.zeros(4)
        cont = 0.0
    else:
        j = np.asarray(current_fn(x), dtype=float)
        cont = 0.0
        for k in range(4):
            xp = x.copy()
            xm = x.copy()
            xp[k] += h
            xm[k] -= h
            cont += (np.asarray(current_fn(xp), dtype=float)[k] - np.asarray(current_fn(xm), dtype=float)[k]) / (2 * h)
    r1 = div - (FOUR_PI / c) * j
    r2 = np.array([dF[l, m, n] + dF[m, n, l] + dF[n, l, m] for (l, m, n) in _TRIPLES])
    return MaxwellResiduals(r1, r2, float(cont))


@dataclass(frozen=True)
class EMStressEnergy:
    """Symmetric electromagnetic stress-energy tensor (contravariant)."""

    tensor: np.ndarray

    @property
    def energy_density(self) -> float:
        return float(self.tensor[3, 3])

    @property
    def poynting(self) -> np.ndarray:
        """(1/4pi) E x B, the mixed space-time block."""
        return self.tensor[:3, 3].copy()

    @property
    def maxwell_stress(self) -> np.ndarray:
        """(1/4pi)[E_i E_j + B_i B_j - (1/2) delta_ij (E^2 + B^2)]."""
        return -self.tensor[:3, :3]

    def trace(self) -> float:
        return float(np.einsum("ab,ab->", METRIC, self.tensor))


def em_stress_energy(f, c: float = 1.0) -> EMStressEnergy:
    """(1/4pi)[F^{la} F_l^b - (1/4) d^{ab} F_mn F^mn]."""
    fc = as_covariant(f)
    fu = METRIC @ fc @ METRIC
    f_low_up = fc @ METRIC  # F_l^b
    inv = np.einsum("mn,mn->", fc, fu)
    m = (np.einsum("la,lb->ab", fu, f_low_up) - 0.25 * METRIC * inv) / FOUR_PI
    m = 0.5 * (m + m.T)
    return EMStressEnergy(m)


def _mixed_stress(field_fn, x):
    """M_a^b at x."""
    return METRIC @ em_stress_energy(field_fn(x)).tensor


def divergence_identity_residual(field_fn: Callable, current_fn: Callable | None, x, h: float,
                                 c: float, check_cyclic: bool = True) -> np.ndarray:
    """d_b M_a^b - (1/c) F^l_a J_l by central differences.

    Vanishes to O(h^2) when the oracles satisfy Maxwell's equations. A
    warning is issued if the homogeneous equations fail noticeably at ``x``.
    """
    x = np.asarray(x, dtype=float)
    if check_cyclic:
        dF = _dF(field_fn, x, h)
        r2 = np.array([dF[l, m, n] + dF[m, n, l] + dF[n, l, m] for (l, m, n) in _TRIPLES])
        scale = float(np.max(np.abs(dF)))
        if scale > 0 and float(np.max(np.abs(r2))) > 0.05 * scale:
            warnings.warn("field oracle violates the homogeneous Maxwell equations near x", RuntimeWarning,
                          stacklevel=2)
    div = np.zeros(4)
    for k in range(4):
        xp = x.copy()
        xm = x.copy()
        xp[k] += h
        xm[k] -= h
        div += (_mixed_stress(field_fn, xp)[:, k] - _mixed_stress(field_fn, xm)[:, k]) / (2.0 * h)
    if current_fn is None:
        return div
    fc = as_covariant(field_fn(x))
    f_up_low = METRIC @ fc  # F^l_a
    j_low = METRIC @ np.asarray(current_fn(x), dtype=float)
    return div - (f_up_low.T @ j_low) / c


def lorentz_force(f, u, charge: float, c: float) -> np.ndarray:
    """(e/c) F^a_l U^l."""
    return (charge / c) * (METRIC @ (as_covariant(f) @ np.asarray(u, dtype=float)))


def integrate_lorentz(state0: ParticleState, field_fn: Callable, ds: float, n: int, c: float,
                      method: str = "rk4", project: bool = False, rtol: float = 1e-10,
                      atol: float = 1e-10) -> Worldline:
    """Charged-particle trajectory under m d^2X/ds^2 = (e/c) F^a_l U^l.

    ``field_fn(x)`` returns a FaradayTensor or covariant 4x4 array.
    """
    state0.check_normalized(c)
    q_over_mc = state0.e / (state0.m * c)

    def rhs(s, y):
        fc = as_covariant(field_fn(y[:4]))
        acc = q_over_mc * (METRIC @ (fc @ y[4:]))
        return np.concatenate((y[4:], acc))

    y0 = np.concatenate((state0.x, state0.u))
    proj = flat_projection(c) if project else None
    s, ys = integrators.integrate(rhs, y0, ds, n, method=method, project=proj, rtol=rtol, atol=atol)
    us = ys[:, 4:]
    res = (np.einsum("ij,jk,ik->i", us, METRIC, us) + c * c) / (c * c)
    return Worldline(s, ys[:, :4], us, res, c, state0.m, state0.e, method, ds)


def uniform_field(E=(0, 0, 0), B=(0, 0, 0)):
    """Field oracle returning the same tensor everywhere."""
    f = FaradayTensor(E, B)
    return lambda x: f


def faraday_from_potential(potential: Callable, x, h: float = 1e-4) -> FaradayTensor:
    """F_mn = d_m A_n - d_n A_m for a covariant potential oracle."""
    x = np.asarray(x, dtype=float)
    dA = np.empty((4, 4))
    for k in range(4):
        xp = x.copy()
        xm = x.copy()
        xp[k] += h
        xm[k] -= h
        dA[k] = (np.asarray(potential(xp), dtype=float) - np.asarray(potential(xm), dtype=float)) / (2.0 * h)
    f = dA - dA.T
    return disassemble_to_tensor(f)


def disassemble_to_tensor(f) -> FaradayTensor:
    e, b = disassemble_faraday(f)
    return FaradayTensor(e, b)


def gauge_transform(potential: Callable, gauge: Callable, gradient: Callable | None = None,
                    h: float = 1e-4) -> Callable:
    """Potential oracle A'_m = A_m - d_m Lambda.

    Supply ``gradient`` (returning d_m Lambda) for an exact transform;
    otherwise the gradient is taken by central differences with step ``h``.
    """
    if gradient is None:
        def gradient(x):
            x = np.asarray(x, dtype=float)
            g = np.empty(4)
            for k in range(4):
                xp = x.copy()
                xm = x.copy()
                xp[k] += h
                xm[k] -= h
                g[k] = (float(gauge(xp)) - float(gauge(xm))) / (2.0 * h)
            return g

    def transformed(x):
        return np.asarray(potential(x), dtype=float) - np.asarray(gradient(x), dtype=float)

    return transformed


def lorenz_gauge_residual(potential: Callable, x, h: float = 1e-4) -> float:
    """d_m A^m with the index raised by the flat metric."""
    x = np.asarray(x, dtype=float)
    total = 0.0
    for k in range(4):
        xp = x.copy()
        xm = x.copy()
        xp[k] += h
        xm[k] -= h
        up = METRIC @ np.asarray(potential(xp), dtype=float)
        um = METRIC @ np.asarray(potential(xm), dtype=float)
        total += (up[k] - um[k]) / (2.0 * h)
    return float(total)


def plane_wave(direction, polarization, k: float, amplitude: float = 1.0):
    """Vacuum plane-wave field oracle travelling along ``direction``.

    E = amplitude * e sin(k (n.x - x4)),  B = n x E.
    """
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    e = np.asarray(polarization, dtype=float)
    e = e - np.dot(e, n) * n
    e = e / np.linalg.norm(e)
    b = np.cross(n, e)

    def field_fn(x):
        s = amplitude * np.sin(k * (np.dot(n, x[:3]) - x[3]))
        return FaradayTensor(s * e, s * b)

    return field_fn


def coulomb_field(q: float, center=(0.0, 0.0, 0.0)):
    """Static point-charge field oracle E = q r / |r|^3."""
    center = np.asarray(center, dtype=float)

    def field_fn(x):
        r = np.asarray(x[:3], dtype=float) - center
        d = np.sqrt(r @ r)
        return FaradayTensor(q * r / d ** 3, np.zeros(3))

    return field_fn
