"""Particle states, sampled worldlines and their CSV serialisation."""

import io
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .errors import NotNormalized, SpeedNotSubluminal
from .minkowski import METRIC

TAU_NORM = 1e-9

WORLDLINE_COLUMNS = ("s", "t", "x1", "x2", "x3", "x4", "u1", "u2", "u3", "u4", "norm_residual")


def format_float(value) -> str:
    """Shortest decimal string that round-trips to the same double."""
    value = float(value)
    if value == 0.0:
        return "0.0" if np.copysign(1.0, value) > 0 else "-0.0"
    return repr(value)


def normalized_velocity(v, c: float, metric=None) -> np.ndarray:
    """4-velocity with coordinate 3-velocity ``v`` normalised to g(U, U) = -c^2.

    ``metric`` is a 4x4 covariant metric at the event; flat space by default.
    """
    v = np.asarray(v, dtype=float)
    g = METRIC if metric is None else np.asarray(metric, dtype=float)
    tangent = np.append(v, c)
    q = -float(tangent @ g @ tangent)
    if not q > 0.0:
        raise SpeedNotSubluminal(f"coordinate velocity {v} is not timelike in the given metric")
    return tangent * (c / np.sqrt(q))


@dataclass(frozen=True)
class ParticleState:
    """Event, 4-velocity, rest mass and charge of a point particle.

    No normalisation check runs here because the relevant metric depends on
    where the state is used; integrators validate on entry.
    """

    x: np.ndarray
    u: np.ndarray
    m: float = 1.0
    e: float = 0.0

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(4)
        u = np.array(self.u, dtype=float).reshape(4)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u))):
            raise ValueError("particle state must be finite")
        if not self.m > 0:
            raise ValueError("rest mass must be positive")
        x.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "u", u)

    @classmethod
    def from_velocity(cls, position, velocity, c: float, t: float = 0.0, m: float = 1.0, e: float = 0.0,
                      metric=None) -> "ParticleState":
        x = np.append(np.asarray(position, dtype=float), c * t)
        g = None if metric is None else metric(x)
        return cls(x, normalized_velocity(velocity, c, g), m, e)

    def norm_residual(self, c: float, metric=None) -> float:
        """(g(U, U) + c^2) / c^2 under the flat metric or the given 4x4 metric."""
        g = METRIC if metric is None else np.asarray(metric, dtype=float)
        return float((self.u @ g @ self.u + c * c) / (c * c))

    def check_normalized(self, c: float, metric=None, tol: float = TAU_NORM):
        res = self.norm_residual(c, metric)
        if not abs(res) <= tol:
            raise NotNormalized(f"g(U,U)/c^2 + 1 = {res:.3e} exceeds {tol:.1e}")


@dataclass(frozen=True)
class Worldline:
    """Proper-time samples of a trajectory.

    ``norm_residual`` holds (g(U, U) + c^2) / c^2 per sample, evaluated with
    the metric the trajectory was integrated in. ``extra`` carries optional
    named per-sample columns appended to the CSV export.
    """

    s: np.ndarray
    x: np.ndarray
    u: np.ndarray
    norm_residual: np.ndarray
    c: float
    m: float = 1.0
    e: float = 0.0
    method: str = "rk4"
    step: float = 0.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        if s.size > 1 and not np.all(np.diff(s) > 0):
            raise ValueError("proper time samples must be strictly increasing")

    @property
    def t(self) -> np.ndarray:
        return self.x[:, 3] / self.c

    def __len__(self):
        return len(self.s)

    def state(self, i: int) -> ParticleState:
        return ParticleState(self.x[i], self.u[i], self.m, self.e)

    @property
    def final(self) -> ParticleState:
        return self.state(-1)

    def with_columns(self, **columns) -> "Worldline":
        extra = dict(self.extra)
        for name, values in columns.items():
            values = np.asarray(values)
            if values.shape[0] != len(self.s):
                raise ValueError(f"column {name!r} has {values.shape[0]} rows, expected {len(self.s)}")
            extra[name] = values
        return Worldline(self.s, self.x, self.u, self.norm_residual, self.c, self.m, self.e, self.method,
                         self.step, extra)

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        header = list(WORLDLINE_COLUMNS) + list(self.extra)
        buf.write(",".join(header) + "\n")
        t = self.t
        for i in range(len(self.s)):
            row = [self.s[i], t[i], *self.x[i], *self.u[i], self.norm_residual[i]]
            cells = [format_float(v) for v in row]
            for col in self.extra.values():
                v = col[i]
                cells.append(str(int(v)) if np.issubdtype(np.asarray(col).dtype, np.integer) else format_float(v))
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()

    def to_csv(self, path):
        atomic_write_text(path, self.to_csv_text())


def read_csv(path) -> dict:
    """Read a CSV written by this package into a dict of float arrays."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    out = {}
    for j, name in enumerate(header):
        col = [r[j] for r in rows]
        try:
            out[name] = np.array([float(v) for v in col])
        except ValueError:
            out[name] = np.array(col)
    return out


def atomic_write_text(path, text: str):
    """Write ``text`` to ``path`` via a temporary file and an atomic rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
