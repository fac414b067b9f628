"""Spatial curvilinear charts, orthonormal triads and orthogonal-coordinate operators.

Charts only relabel space: the time coordinate x4 passes through unchanged,
so every connection symbol carrying an index 4 vanishes and derivatives
along x4 are plain partials.

Numerical derivatives here use a five-point central stencil (fourth order)
by default; pass ``order=2`` for the three-point stencil.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateScaleFactor, SingularJacobian, TriadNotOrthonormal
from .gravity import christoffel_from_derivatives

DEFAULT_H = 1e-3
TRIAD_TOL = 1e-10
ANTISYMMETRY_TOL = 1e-10


def _partial(f, q, k, h, order=4):
    q = np.asarray(q, dtype=float)

    def at(step):
        y = q.copy()
        y[k] += step
        return np.asarray(f(y), dtype=float)

    if order == 2:
        return (at(h) - at(-h)) / (2.0 * h)
    return (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h)


def _gradient(f, q, h, order=4, dims=None):
    q = np.asarray(q, dtype=float)
    return np.stack([_partial(f, q, k, h, order) for k in range(q.size if dims is None else dims)])


@dataclass(frozen=True)
class Chart:
    """Curvilinear labels q for Cartesian space.

    ``to_cartesian`` is X(q), ``from_cartesian`` its inverse. ``jacobian``
    returns J[k, i] = dX^k/dq^i; ``scale_factors`` (orthogonal charts only)
    returns (h1, h2, h3). ``margin`` bounds |det J| and each h_i from below.
    """

    name: str
    to_cartesian: Callable
    from_cartesian: Callable
    jacobian_fn: Callable | None = None
    scale_fn: Callable | None = None
    scale_grad_fn: Callable | None = None
    margin: float = 1e-9
    h: float = DEFAULT_H

    def jacobian(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)[:3]
        if self.jacobian_fn is not None:
            J = np.asarray(self.jacobian_fn(q), dtype=float)
        else:
            J = _gradient(self.to_cartesian, q, self.h * 1e-2).T
        det = float(np.linalg.det(J))
        if not abs(det) > self.margin:
            raise SingularJacobian(f"{self.name} chart: |det J| = {abs(det):.3e} at {q}")
        return J

    @property
    def orthogonal(self) -> bool:
        return self.scale_fn is not None

    def scale_factors(self, q) -> np.ndarray:
        if self.scale_fn is None:
            raise TypeError(f"{self.name} chart is not declared orthogonal")
        hs = np.asarray(self.scale_fn(np.asarray(q, dtype=float)[:3]), dtype=float)
        if not np.all(hs > self.margin):
            raise DegenerateScaleFactor(f"{self.name} chart: scale factors {hs} at {np.asarray(q)[:3]}")
        return hs

    def scale_gradients(self, q) -> np.ndarray:
        """dh[k, i] = d h_i / d q^k."""
        if self.scale_grad_fn is not None:
            return np.asarray(self.scale_grad_fn(np.asarray(q, dtype=float)[:3]), dtype=float)
        return _gradient(self.scale_factors, np.asarray(q, dtype=float)[:3], self.h)

    def round_trip_error(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.max(np.abs(self.to_cartesian(self.from_cartesian(x)) - x)))


def cartesian() -> Chart:
    return Chart("cartesian", lambda q: np.asarray(q, dtype=float)[:3].copy(),
                 lambda x: np.asarray(x, dtype=float)[:3].copy(),
                 lambda q: np.eye(3), lambda q: np.ones(3), lambda q: np.zeros((3, 3)))


def spherical(margin: float = 1e-9) -> Chart:
    """q = (r, theta, phi), theta the polar angle."""

    def to_cart(q):
        r, th, ph = q[:3]
        return np.array([r * math.sin(th) * math.cos(ph), r * math.sin(th) * math.sin(ph), r * math.cos(th)])

    def from_cart(x):
        r = math.sqrt(x[0] ** 2 + x[1] ** 2 + x[2] ** 2)
        return np.array([r, math.acos(x[2] / r), math.atan2(x[1], x[0])])

    def jac(q):
        r, th, ph = q
        st, ct, sp, cp = math.sin(th), math.cos(th), math.sin(ph), math.cos(ph)
        return np.array([[st * cp, r * ct * cp, -r * st * sp],
                         [st * sp, r * ct * sp, r * st * cp],
                         [ct, -r * st, 0.0]])

    def scales(q):
        return np.array([1.0, q[0], q[0] * math.sin(q[1])])

    def scale_grads(q):
        r, th = q[0], q[1]
        return np.array([[0.0, 1.0, math.sin(th)], [0.0, 0.0, r * math.cos(th)], [0.0, 0.0, 0.0]])

    return Chart("spherical", to_cart, from_cart, jac, scales, scale_grads, margin)


def cylindrical(margin: float = 1e-9) -> Chart:
    """q = (rho, phi, z)."""

    def to_cart(q):
        return np.array([q[0] * math.cos(q[1]), q[0] * math.sin(q[1]), q[2]])

    def from_cart(x):
        return np.array([math.hypot(x[0], x[1]), math.atan2(x[1], x[0]), x[2]])

    def jac(q):
        c, s = math.cos(q[1]), math.sin(q[1])
        return np.array([[c, -q[0] * s, 0.0], [s, q[0] * c, 0.0], [0.0, 0.0, 1.0]])

    return Chart("cylindrical", to_cart, from_cart, jac, lambda q: np.array([1.0, q[0], 1.0]),
                 lambda q: np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]), margin)


CHARTS = {"cartesian": cartesian, "spherical": spherical, "cylindrical": cylindrical}


def chart_by_name(name: str) -> Chart:
    try:
        return CHARTS[name]()
    except KeyError:
        raise ValueError(f"unknown chart {name!r}; choose from {sorted(CHARTS)}") from None


@dataclass(frozen=True)
class InducedMetric:
    spatial: np.ndarray

    @property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.spatial)

    @property
    def full(self) -> np.ndarray:
        """4x4 block form with g_i4 = 0 and g_44 = -1."""
        g = np.zeros((4, 4))
        g[:3, :3] = self.spatial
        g[3, 3] = -1.0
        return g

    @property
    def volume(self) -> float:
        return math.sqrt(float(np.linalg.det(self.spatial)))


def induced_metric(chart: Chart, q) -> InducedMetric:
    """g_ij = delta_kl dX^k/dq^i dX^l/dq^j."""
    J = chart.jacobian(q)
    g = J.T @ J
    return InducedMetric(0.5 * (g + g.T))


def _metric_derivatives(chart: Chart, q, h, order):
    q3 = np.asarray(q, dtype=float)[:3]
    if chart.orthogonal and chart.jacobian_fn is not None:
        hs = chart.scale_factors(q3)
        dh = chart.scale_gradients(q3)
        dg = np.zeros((3, 3, 3))
        for i in range(3):
            dg[:, i, i] = 2.0 * hs[i] * dh[:, i]
        return dg
    return _gradient(lambda y: induced_metric(chart, y).spatial, q3, h, order)


def curvilinear_christoffel(chart: Chart, q, h: float = DEFAULT_H, order: int = 4, numeric: bool = False) -> np.ndarray:
    """Gamma^a_bc of the induced metric as a 4x4x4 array (index 4 entries zero).

    Built-in orthogonal charts use analytic scale-factor derivatives unless
    ``numeric`` is set; otherwise the induced metric is differentiated with
    the chosen stencil.
    """
    q3 = np.asarray(q, dtype=float)[:3]
    if numeric:
        dg = _gradient(lambda y: induced_metric(chart, y).spatial, q3, h, order)
    else:
        dg = _metric_derivatives(chart, q3, h, order)
    gam = np.zeros((4, 4, 4))
    gam[:3, :3, :3] = christoffel_from_derivatives(induced_metric(chart, q3).inverse, dg)
    return gam


def orthogonal_christoffel(chart: Chart, q) -> np.ndarray:
    """Closed-form symbols of diag(h1^2, h2^2, h3^2) (3x3x3).

    Gamma^i_ii = d_i ln h_i, Gamma^i_ij = d_j ln h_i, Gamma^i_jj = -(h_j / h_i^2) d_i h_j.
    """
    hs = chart.scale_factors(q)
    dh = chart.scale_gradients(q)
    gam = np.zeros((3, 3, 3))
    for i in range(3):
        for j in range(3):
            if i == j:
                gam[i, i, i] = dh[i, i] / hs[i]
            else:
                gam[i, i, j] = gam[i, j, i] = dh[j, i] / hs[i]
                gam[i, j, j] = -hs[j] * dh[i, j] / hs[i] ** 2
    return gam


def covariant_derivative(chart: Chart, tensor_fn: Callable, q, n_upper: int | None = None, h: float = DEFAULT_H,
                         order: int = 4) -> np.ndarray:
    """nabla_k T for a tensor oracle in chart components.

    ``q`` may hold 3 spatial labels or 4 (labels plus x4); the tensor's
    indices then run over 3 or 4 values. The first ``n_upper`` slots are
    contravariant, the rest covariant. The derivative index comes first.
    """
    q = np.asarray(q, dtype=float)
    n = q.size
    T = np.asarray(tensor_fn(q), dtype=float)
    rank = T.ndim
    n_upper = rank if n_upper is None else n_upper
    gam = curvilinear_christoffel(chart, q, h, order)[:n, :n, :n]
    out = _gradient(tensor_fn, q, h, order)
    for s in range(rank):
        if s < n_upper:
            out = out + np.moveaxis(np.tensordot(gam, T, axes=([2], [s])), 0, s + 1)
        else:
            out = out - np.moveaxis(np.tensordot(gam, T, axes=([0], [s])), 1, s + 1)
    return out


def transform_tensor(chart: Chart, q, T, n_upper: int) -> np.ndarray:
    """Cartesian components at X(q) to chart components (4 passes through).

    Upper slots use dq/dx = J^-1, lower slots use dx/dq = J.
    """
    T = np.asarray(T, dtype=float)
    n = T.shape[0] if T.ndim else 3
    J = chart.jacobian(q)
    up = np.eye(n)
    low = np.eye(n)
    up[:3, :3] = np.linalg.inv(J)
    low[:3, :3] = J.T
    out = T
    for s in range(T.ndim):
        m = up if s < n_upper else low
        out = np.moveaxis(np.tensordot(m, out, axes=([1], [s])), 0, s)
    return out


# orthonormal triads


@dataclass(frozen=True)
class Triad:
    """lam[i, A] = lambda^i_A and its inverse mu[A, i]."""

    lam: np.ndarray
    mu: np.ndarray

    def check(self, g, tol: float = TRIAD_TOL):
        err = float(np.max(np.abs(self.lam.T @ g @ self.lam - np.eye(3))))
        if err > tol:
            raise TriadNotOrthonormal(f"triad orthonormality error {err:.3e} exceeds {tol:.0e}")
        inv = float(np.max(np.abs(self.lam @ self.mu - np.eye(3))))
        if inv > 1e-12:
            raise TriadNotOrthonormal(f"lambda mu differs from identity by {inv:.3e}")

    def to_frame(self, T, n_upper: int) -> np.ndarray:
        """Chart components to frame components: mu on upper slots, lambda on lower."""
        out = np.asarray(T, dtype=float)
        for s in range(out.ndim):
            m = self.mu if s < n_upper else self.lam.T
            out = np.moveaxis(np.tensordot(m, out, axes=([1], [s])), 0, s)
        return out


def orthonormal_triad(chart: Chart, q) -> Triad:
    """Scale-factor triad for orthogonal charts, else g^(-1/2) (symmetric)."""
    if chart.orthogonal:
        hs = chart.scale_factors(q)
        return Triad(np.diag(1.0 / hs), np.diag(hs))
    g = induced_metric(chart, q).spatial
    w, v = np.linalg.eigh(g)
    lam = v @ np.diag(w ** -0.5) @ v.T
    return Triad(lam, v @ np.diag(w ** 0.5) @ v.T)


def ricci_rotation(chart: Chart, q, triad_fn: Callable | None = None, h: float = DEFAULT_H, order: int = 4,
                   tol: float = ANTISYMMETRY_TOL) -> np.ndarray:
    """gamma_ABC = g_jl (nabla_k lambda^l_A) lambda^j_B lambda^k_C.

    Raises TriadNotOrthonormal when the triad fails orthonormality at q or
    the result is not antisymmetric in its first pair within ``tol``.
    """
    q3 = np.asarray(q, dtype=float)[:3]
    triad_fn = triad_fn or (lambda y: orthonormal_triad(chart, y))
    triad = triad_fn(q3)
    g = induced_metric(chart, q3).spatial
    triad.check(g)
    lam = triad.lam
    gamma = np.zeros((3, 3, 3))
    for A in range(3):
        d = covariant_derivative(chart, lambda y: triad_fn(y).lam[:, A], q3, 1, h, order)  # d[k, l]
        gamma[A] = np.einsum("jl,kl,jB,kC->BC", g, d, lam, lam)
    asym = float(np.max(np.abs(gamma + gamma.transpose(1, 0, 2))))
    if asym > tol:
        raise TriadNotOrthonormal(f"rotation coefficients not antisymmetric: {asym:.3e}")
    return gamma


# orthogonal-coordinate operators


def _levi_civita():
    e = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        e[i, j, k] = 1.0
        e[i, k, j] = -1.0
    return e


EPS3 = _levi_civita()


@dataclass(frozen=True)
class OrthogonalOperators:
    """grad, div, curl and Laplacian for an orthogonal chart.

    Fields are oracles of q. "Physical" components are frame components
    along the unit vectors; "coordinate" vectors are contravariant for div
    and covariant for curl input, matching the natural index placement.
    """

    chart: Chart
    h: float = DEFAULT_H
    order: int = 4

    def _d(self, f, q):
        return _gradient(f, np.asarray(q, dtype=float), self.h, self.order, dims=3)

    def grad(self, phi, q) -> np.ndarray:
        """Covariant components d_i phi."""
        return self._d(phi, q)

    def grad_phys(self, phi, q) -> np.ndarray:
        return self._d(phi, q) / self.chart.scale_factors(q)

    def div(self, T, q, physical: bool = False) -> float:
        """(h1 h2 h3)^-1 d_i (h1 h2 h3 T^i)."""
        sf = self.chart.scale_factors

        def flux(y):
            hs = sf(y)
            t = np.asarray(T(y), dtype=float)
            if physical:
                t = t / hs
            return np.prod(hs) * t

        d = self._d(flux, q)
        return float(np.trace(d) / np.prod(sf(q)))

    def curl(self, A_cov, q) -> np.ndarray:
        """Contravariant components eps^ijk d_j A_k / (h1 h2 h3) from covariant A."""
        d = self._d(A_cov, q)  # d[j, k]
        return np.einsum("ijk,jk->i", EPS3, d) / np.prod(self.chart.scale_factors(q))

    def curl_phys(self, A_phys, q) -> np.ndarray:
        """Physical components: h_i times the contravariant curl of A_k = h_k A_(k)."""
        sf = self.chart.scale_factors
        return sf(q) * self.curl(lambda y: sf(y) * np.asarray(A_phys(y), dtype=float), q)

    def laplacian(self, W, q) -> float:
        """(h1 h2 h3)^-1 sum_i d_i[(h1 h2 h3 / h_i^2) d_i W]."""
        sf = self.chart.scale_factors
        grad = self._d

        def flux(y):
            hs = sf(y)
            return np.prod(hs) / hs ** 2 * grad(W, y)

        d = self._d(flux, q)
        return float(np.trace(d) / np.prod(sf(q)))


def orthogonal_operators(chart: Chart, h: float = DEFAULT_H, order: int = 4) -> OrthogonalOperators:
    if not chart.orthogonal:
        raise TypeError(f"{chart.name} chart has no scale factors")
    return OrthogonalOperators(chart, h, order)


def unit_vectors(chart: Chart, q) -> np.ndarray:
    """Cartesian components of the chart's unit vectors, one per row."""
    J = chart.jacobian(q)
    return (J / np.linalg.norm(J, axis=0)).T
