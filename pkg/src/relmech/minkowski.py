"""Flat-spacetime tensor algebra.

Conventions used throughout the package:

* Coordinates are ``x = (x1, x2, x3, x4)`` with ``x4 = c t``. Arrays are
  zero-based, so the time component lives at index 3.
* The metric is ``diag(+1, +1, +1, -1)``.
* A Lorentz transform maps components as ``x'^a = l^a_b x^b + c^a``.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NotLorentz, SpeedNotSubluminal

METRIC = np.diag([1.0, 1.0, 1.0, -1.0])
METRIC.setflags(write=False)
INVERSE_METRIC = METRIC.copy()
INVERSE_METRIC.setflags(write=False)

TAU_LORENTZ = 1e-12

TIMELIKE = "timelike"
SPACELIKE = "spacelike"
NULL = "null"

_SIGN = np.array([1.0, 1.0, 1.0, -1.0])


def levi_civita3() -> np.ndarray:
    """The oriented permutation symbol with eps[0, 1, 2] = +1."""
    eps = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[i, j, k] = 1.0
        eps[i, k, j] = -1.0
    return eps


EPSILON3 = levi_civita3()
EPSILON3.setflags(write=False)


def lower(v) -> np.ndarray:
    """Lower a contravariant 4-vector: spatial parts unchanged, time part negated."""
    return _SIGN * np.asarray(v, dtype=float)


def raise_index(v) -> np.ndarray:
    """Raise a covariant 4-vector; inverse of :func:`lower`."""
    return _SIGN * np.asarray(v, dtype=float)


def inner4(a, b) -> float:
    """Minkowski inner product of two contravariant 4-vectors."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(a[0] * b[0] + a[1] * b[1] + a[2] * b[2] - a[3] * b[3])


def null_tolerance(v) -> float:
    v = np.asarray(v, dtype=float)
    return 1e-12 * max(1.0, float(np.dot(v, v)))


def classify(v, tol: float | None = None) -> str:
    """Return ``"timelike"``, ``"spacelike"`` or ``"null"`` for a 4-vector.

    Values of the squared interval within ``tol`` of zero count as null. The
    default band scales with the Euclidean size of ``v``.
    """
    q = inner4(v, v)
    if tol is None:
        tol = null_tolerance(v)
    if abs(q) <= tol:
        return NULL
    return SPACELIKE if q > 0 else TIMELIKE


def lorentz_residual(matrix) -> float:
    """max |L^T D L - D| for a candidate transform matrix."""
    m = np.asarray(matrix, dtype=float)
    return float(np.max(np.abs(m.T @ METRIC @ m - METRIC)))


@dataclass(frozen=True)
class LorentzTransform:
    """Inhomogeneous Lorentz transform ``x' = matrix @ x + offset``.

    Construction from a raw matrix is checked against the metric-preservation
    condition and raises :class:`NotLorentz` beyond ``tol``.
    """

    matrix: np.ndarray
    offset: np.ndarray = field(default_factory=lambda: np.zeros(4))
    tol: float = TAU_LORENTZ

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (4, 4):
            raise ValueError(f"Lorentz matrix must be 4x4, got {m.shape}")
        off = np.array(self.offset, dtype=float).reshape(4)
        res = lorentz_residual(m)
        if not np.isfinite(res) or res > self.tol:
            raise NotLorentz(f"matrix violates metric preservation by {res:.3e} (tolerance {self.tol:.1e})")
        m.setflags(write=False)
        off.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "offset", off)

    @property
    def inverse_matrix(self) -> np.ndarray:
        """The matrix a^a_b with l a = identity, computed as D L^T D."""
        return METRIC @ self.matrix.T @ METRIC

    def inverse(self) -> "LorentzTransform":
        a = self.inverse_matrix
        return LorentzTransform(a, -a @ self.offset, tol=self.tol)

    def apply(self, x) -> np.ndarray:
        """Transform an event (matrix plus offset)."""
        return self.matrix @ np.asarray(x, dtype=float) + self.offset

    def apply_vector(self, v) -> np.ndarray:
        """Transform a contravariant vector (no offset)."""
        return self.matrix @ np.asarray(v, dtype=float)

    def verify(self) -> float:
        return lorentz_residual(self.matrix)


def identity_transform() -> LorentzTransform:
    return LorentzTransform(np.eye(4))


def verify(transform) -> float:
    """Metric-preservation residual of a transform or raw matrix."""
    if isinstance(transform, LorentzTransform):
        return transform.verify()
    return lorentz_residual(transform)


def compose(first: LorentzTransform, second: LorentzTransform) -> LorentzTransform:
    """Transform equal to applying ``second`` and then ``first``."""
    m = first.matrix @ second.matrix
    off = first.matrix @ second.offset + first.offset
    tol = max(first.tol, second.tol, 10 * TAU_LORENTZ)
    return LorentzTransform(m, off, tol=tol)


def lorentz_factor(v, c: float) -> float:
    """1/sqrt(1 - |v|^2/c^2); raises for |v| >= c."""
    v = np.asarray(v, dtype=float)
    beta2 = float(np.dot(v, v)) / (c * c)
    if not beta2 < 1.0:
        raise SpeedNotSubluminal(f"|v|/c = {np.sqrt(beta2):.6g} must be strictly less than 1")
    return 1.0 / np.sqrt(1.0 - beta2)


def axis_boost_matrix(beta: float) -> np.ndarray:
    """Boost matrix along the first spatial axis for speed ``beta`` (in units of c)."""
    if not abs(beta) < 1.0:
        raise SpeedNotSubluminal(f"|beta| = {abs(beta):.6g} must be strictly less than 1")
    g = 1.0 / np.sqrt(1.0 - beta * beta)
    m = np.eye(4)
    m[0, 0] = g
    m[3, 3] = g
    m[0, 3] = -g * beta
    m[3, 0] = -g * beta
    return m


def rotation_to_axis1(n) -> np.ndarray:
    """Proper rotation R (det +1) with R @ n = e1 for a unit vector n."""
    n = np.asarray(n, dtype=float)
    e1 = np.array([1.0, 0.0, 0.0])
    axis = np.cross(n, e1)
    s = float(np.linalg.norm(axis))
    cth = float(np.dot(n, e1))
    if s < 1e-15:
        if cth > 0:
            return np.eye(3)
        # antiparallel: half turn about e3
        return np.diag([-1.0, -1.0, 1.0])
    k = axis / s
    kx = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + s * kx + (1.0 - cth) * (kx @ kx)


def make_boost(v, c: float) -> LorentzTransform:
    """Pure boost to a frame moving with 3-velocity ``v``.

    Parameters
    ----------
    v : array_like, shape (3,)
        Velocity of the new frame relative to the old one.
    c : float
        Speed of light in the units of ``v``.

    Returns
    -------
    LorentzTransform
        The axis-1 boost conjugated by the rotation that carries ``v`` onto
        the first axis.
    """
    v = np.asarray(v, dtype=float)
    lorentz_factor(v, c)
    speed = math.hypot(*v)  # no underflow for tiny components, unlike norm()
    if speed == 0.0:
        return identity_transform()
    r = np.eye(4)
    r[:3, :3] = rotation_to_axis1(v / speed)
    m = r.T @ axis_boost_matrix(speed / c) @ r
    return LorentzTransform(m)


def make_rotation(axis, angle: float) -> LorentzTransform:
    """Spatial rotation by ``angle`` about ``axis`` (right-handed)."""
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    kx = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    r3 = np.eye(3) + np.sin(angle) * kx + (1.0 - np.cos(angle)) * (kx @ kx)
    m = np.eye(4)
    m[:3, :3] = r3
    return LorentzTransform(m)


@dataclass(frozen=True)
class GeneralTensor:
    """Dense tensor with ``r`` contravariant slots followed by ``s`` covariant slots."""

    components: np.ndarray
    r: int = 0
    s: int = 0

    def __post_init__(self):
        comp = np.array(self.components, dtype=float)
        rank = self.r + self.s
        if self.r < 0 or self.s < 0:
            raise ValueError("tensor orders must be non-negative")
        if rank > 4:
            raise ValueError(f"total rank {rank} exceeds the supported maximum of 4")
        if comp.shape != (4,) * rank:
            raise ValueError(f"components of shape {comp.shape} do not match orders r={self.r}, s={self.s}")
        comp.setflags(write=False)
        object.__setattr__(self, "components", comp)

    def __getitem__(self, idx):
        return self.components[idx]


def transform_tensor(tensor: GeneralTensor, transform: LorentzTransform) -> GeneralTensor:
    """Apply the tensor transformation law slot by slot.

    Contravariant slots receive ``l^a_b``; covariant slots receive the inverse
    matrix ``a^b_m`` contracted on its first index.
    """
    t = tensor.components
    lmat = transform.matrix
    amat = transform.inverse_matrix
    for slot in range(tensor.r + tensor.s):
        if slot < tensor.r:
            t = np.tensordot(lmat, t, axes=([1], [slot]))
        else:
            t = np.tensordot(amat, t, axes=([0], [slot]))
        t = np.moveaxis(t, 0, slot)
    return GeneralTensor(t, tensor.r, tensor.s)


def epsilon_cross(v, w) -> np.ndarray:
    """Cross product written as eps_ijk v^j w^k."""
    return np.einsum("ijk,j,k->i", EPSILON3, np.asarray(v, dtype=float), np.asarray(w, dtype=float))


def epsilon_curl(field_fn: Callable, x, h: float = 1e-4) -> np.ndarray:
    """Curl of a 3-vector field by central differences.

    The permutation-symbol contraction eps_ijk dB^j/dx^k equals minus the
    usual curl, so the result is returned as -eps_ijk dB^j/dx^k, which is
    the familiar right-handed curl.
    """
    x = np.asarray(x, dtype=float)
    jac = np.empty((3, 3))  # jac[k, j] = dB^j/dx^k
    for k in range(3):
        xp = x.copy()
        xm = x.copy()
        xp[k] += h
        xm[k] -= h
        jac[k] = (np.asarray(field_fn(xp), dtype=float) - np.asarray(field_fn(xm), dtype=float)) / (2.0 * h)
    return -np.einsum("ijk,kj->i", EPSILON3, jac)


def dalembertian(w: Callable, x, h: float = 1e-4, c: float | None = None) -> float:
    """Wave operator d^ab d_a d_b W on the nine-point central stencil.

    ``x`` is an event with ``x4 = c t``, so the operator is the sum of the
    three spatial second derivatives minus the second derivative in x4. The
    ``c`` argument is accepted for interface symmetry and is not needed.
    """
    x = np.asarray(x, dtype=float)
    w0 = float(w(x))
    total = 0.0
    for k in range(4):
        xp = x.copy()
        xm = x.copy()
        xp[k] += h
        xm[k] -= h
        second = (float(w(xp)) - 2.0 * w0 + float(w(xm))) / (h * h)
        total += _SIGN[k] * second
    return total


def velocity_addition(beta1: float, beta2: float) -> float:
    """Collinear relativistic velocity composition in units of c."""
    return (beta1 + beta2) / (1.0 + beta1 * beta2)
