"""Scenario configuration, dispatch and report emission for the command line.

Configs are flat ``key = value`` text. Keys may carry a dotted section
prefix (``orbit.GM``), ``#`` starts a comment, and every key is declared in
``KEYS`` with its type, default, allowed range and help line.
"""

import math
import os
import time
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable

import numpy as np

from . import curvilinear as cv
from . import electromagnetism as em
from . import fluids as fl
from . import gravity as gr
from . import minkowski as mk
from .errors import ConfigError, ParseError, RangeError, UnknownKey
from .orbits import (OrbitConfig, kepler_angular_momentum, measure_precession, perihelion_shift_closed_form,
                     integrate_geodesic, precession_arcsec_per_century, revolutions_per_century, run_orbit)
from .worldline import ParticleState, Worldline, atomic_write_text, format_float

SCENARIOS = ("orbit", "lorentz_trajectory", "charged_dust", "fluid_streamline", "residual_sweep", "identity_suite")
DEFAULT_OUT = "relmech_out"


# key registry


@dataclass(frozen=True)
class Key:
    name: str
    kind: str  # float, int, bool, str, vec3, choice
    default: object
    doc: str
    choices: tuple = ()
    low: float | None = None
    high: float | None = None
    strict_low: bool = False

    def describe(self) -> str:
        if self.kind == "choice":
            kind = " | ".join(self.choices)
        else:
            kind = self.kind
        rng = ""
        if self.low is not None or self.high is not None:
            lo = "-inf" if self.low is None else format_float(self.low) if self.kind == "float" else str(self.low)
            hi = "inf" if self.high is None else format_float(self.high) if self.kind == "float" else str(self.high)
            rng = f" range {'(' if self.strict_low else '['}{lo}, {hi}{']' if self.high is not None else ')'}"
        default = "(required)" if self.name == "scenario" else _show(self.default)
        return f"{self.name} : {kind}{rng}, default {default}\n    {self.doc}"


def _show(value) -> str:
    if value is None:
        return "(unset)"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, tuple):
        return ", ".join(_show(v) for v in value)
    return str(value)


def _keys(*entries):
    return {k.name: k for k in entries}


POS = dict(low=0.0, strict_low=True)
NONNEG = dict(low=0.0)
ZERO3 = (0.0, 0.0, 0.0)

KEYS = _keys(
    Key("scenario", "choice", None, "Scenario kind to run.", SCENARIOS),
    Key("id", "str", "", "Scenario id used for the output subdirectory; defaults to the scenario kind."),
    Key("c", "float", 299792458.0, "Speed of light in the config's units.", **POS),
    Key("natural_units", "bool", False, "Set c = 1; conflicts with an explicit c other than 1."),
    Key("G", "float", 6.6743e-11, "Gravitational constant, used with orbit.M.", **POS),
    Key("seed", "int", 0, "Seed for randomised identity checks; --seed overrides.", **NONNEG),
    Key("out", "str", DEFAULT_OUT, "Output directory; --out and RELMECH_OUT override it in that order."),
    Key("chart", "choice", "cartesian", "Chart for extra q1..q3 trajectory columns and curvilinear checks.",
        tuple(cv.CHARTS)),
    Key("output.stride", "int", 1, "Write every n-th trajectory sample (first and last always kept).", low=1),
    Key("integrator.method", "choice", "rk4", "Stepper for trajectories and streamlines.", ("rk4", "rkf45")),
    Key("integrator.step", "float", 0.01, "Proper-time step (initial step for rkf45).", **POS),
    Key("integrator.steps", "int", 1000, "Number of steps.", low=1),
    Key("integrator.rtol", "float", 1e-10, "rkf45 relative tolerance.", **POS),
    Key("integrator.atol", "float", 1e-10, "rkf45 absolute tolerance.", **POS),
    Key("integrator.project", "bool", False, "Rescale U onto the mass shell after each step."),
    Key("integrator.norm_tolerance", "float", 1e-9, "Bound on |g(U,U)/c^2 + 1| along the run.", **POS),
    Key("orbit.GM", "float", None, "Central GM in m^3/s^2 (or set orbit.M).", **POS),
    Key("orbit.M", "float", None, "Central mass; GM = G M when orbit.GM is unset.", **POS),
    Key("orbit.a", "float", None, "Semi-major axis; the run starts at perihelion.", **POS),
    Key("orbit.e", "float", 0.0, "Eccentricity.", low=0.0, high=1.0),
    Key("orbit.r0", "float", None, "Initial radius (with orbit.phidot instead of a, e).", **POS),
    Key("orbit.rdot", "float", 0.0, "Initial radial speed."),
    Key("orbit.phidot", "float", None, "Initial angular rate; selects the polar-data start."),
    Key("orbit.revolutions", "float", 50.0, "Revolutions to integrate.", **POS),
    Key("orbit.steps_per_rev", "int", 2000, "Steps per Kepler period.", low=4),
    Key("orbit.method", "choice", "rk4", "Orbit stepper.", ("rk4", "rkf45")),
    Key("orbit.project", "bool", True, "Mass-shell projection during the orbit."),
    Key("orbit.gm_scale", "float", 1.0, "Factor applied to GM in the simulation to amplify the shift.", **POS),
    Key("orbit.tolerance", "float", 0.05, "Allowed relative deviation of measured from closed-form shift.", **POS),
    Key("orbit.drift_tolerance", "float", 1e-8, "Allowed relative drift of the energy and angular momentum.",
        **POS),
    Key("particle.position", "vec3", ZERO3, "Initial position."),
    Key("particle.velocity", "vec3", ZERO3, "Initial coordinate 3-velocity."),
    Key("particle.t", "float", 0.0, "Initial coordinate time."),
    Key("particle.m", "float", 1.0, "Rest mass.", **POS),
    Key("particle.e", "float", 0.0, "Charge."),
    Key("field.kind", "choice", "zero", "External electromagnetic field.", ("zero", "uniform", "plane_wave", "coulomb")),
    Key("field.E", "vec3", ZERO3, "Uniform electric field."),
    Key("field.B", "vec3", ZERO3, "Uniform magnetic field."),
    Key("field.direction", "vec3", (1.0, 0.0, 0.0), "Plane-wave propagation direction."),
    Key("field.polarization", "vec3", (0.0, 1.0, 0.0), "Plane-wave electric polarisation."),
    Key("field.k", "float", 1.0, "Plane-wave number per unit x4.", **POS),
    Key("field.amplitude", "float", 1.0, "Plane-wave amplitude."),
    Key("field.q", "float", 1.0, "Coulomb source charge."),
    Key("field.center", "vec3", ZERO3, "Coulomb source position."),
    Key("potential.kind", "choice", "zero", "Newtonian potential W.", ("zero", "uniform", "point_mass")),
    Key("potential.GM", "float", 0.0, "point_mass strength.", **NONNEG),
    Key("potential.g", "vec3", ZERO3, "uniform gravitational acceleration."),
    Key("potential.center", "vec3", ZERO3, "point_mass position."),
    Key("fluid.kind", "choice", "perfect", "Streamline force law.", ("charged_dust", "perfect", "plasma")),
    Key("fluid.rho", "float", 1.0, "Rest mass density.", **NONNEG),
    Key("fluid.p", "float", 0.0, "Pressure at the origin.", **NONNEG),
    Key("fluid.grad_p", "vec3", ZERO3, "Uniform spatial pressure gradient."),
    Key("fluid.sigma", "float", 0.0, "Rest charge density."),
    Key("sweep.model", "choice", "perfect", "Residual family evaluated on the grid.",
        ("dust", "perfect", "plasma", "viscous")),
    Key("sweep.flow", "choice", "uniform", "Manufactured flow: uniform motion or charge-balanced gyration.",
        ("uniform", "gyration")),
    Key("sweep.n", "int", 10, "Grid points per axis (n^3 events).", low=1, high=200),
    Key("sweep.extent", "float", 0.5, "Half-width of the grid cube.", **POS),
    Key("sweep.center", "vec3", ZERO3, "Grid centre."),
    Key("sweep.x4", "float", 0.0, "Event time coordinate x4 of the grid."),
    Key("sweep.h", "float", 1e-3, "Finite-difference step.", **POS),
    Key("sweep.tolerance", "float", 1e-5, "Bound on the largest residual component.", **NONNEG),
    Key("sweep.velocity", "vec3", (0.1, 0.0, 0.0), "uniform flow velocity."),
    Key("sweep.omega", "float", 0.5, "gyration angular rate.", **POS),
    Key("sweep.B", "float", 1.0, "gyration magnetic field along x3.", **POS),
    Key("sweep.rho", "float", 1.0, "Flow density.", **POS),
    Key("sweep.p", "float", 0.0, "Flow pressure (constant).", **NONNEG),
    Key("sweep.eta", "float", 0.0, "Shear viscosity for the viscous model.", **NONNEG),
    Key("sweep.zeta", "float", 0.0, "Bulk viscosity for the viscous model.", **NONNEG),
    Key("identity.samples", "int", 1000, "Random transforms for the Lorentz-group checks.", low=1),
    Key("identity.vectors", "int", 10000, "Random vectors for invariance checks.", low=1),
    Key("identity.gauges", "int", 100, "Random polynomial gauge functions.", low=1),
)


def help_config() -> str:
    out = ["Configuration keys (flat `key = value`, `#` comments):", ""]
    out += [KEYS[k].describe() for k in KEYS]
    return "\n".join(out) + "\n"


def _convert(key: Key, raw: str, lineno: int):
    try:
        if key.kind == "float":
            value = float(raw)
        elif key.kind == "int":
            value = int(raw)
        elif key.kind == "bool":
            low = raw.lower()
            if low in ("true", "yes", "on", "1"):
                value = True
            elif low in ("false", "no", "off", "0"):
                value = False
            else:
                raise ValueError("expected true or false")
        elif key.kind == "vec3":
            parts = raw.replace(",", " ").split()
            if len(parts) != 3:
                raise ValueError("expected three numbers")
            value = tuple(float(p) for p in parts)
        elif key.kind == "choice":
            if raw not in key.choices:
                raise RangeError(f"line {lineno}: {key.name} = {raw!r} is not one of {', '.join(key.choices)}")
            value = raw
        else:
            value = raw
    except RangeError:
        raise
    except ValueError as exc:
        raise ParseError(f"line {lineno}: cannot read {key.name} = {raw!r} as {key.kind}: {exc}") from None
    _check_range(key, value, lineno)
    return value


def _check_range(key: Key, value, lineno: int):
    nums = value if key.kind == "vec3" else (value,) if key.kind in ("float", "int") else ()
    for v in nums:
        if not math.isfinite(v):
            raise RangeError(f"line {lineno}: {key.name} must be finite")
    if key.kind not in ("float", "int"):
        return
    if key.low is not None and (value < key.low or (key.strict_low and value == key.low)):
        raise RangeError(f"line {lineno}: {key.name} = {value!r} must be {'>' if key.strict_low else '>='} {key.low}")
    if key.high is not None and value > key.high:
        raise RangeError(f"line {lineno}: {key.name} = {value!r} must be <= {key.high}")


@dataclass(frozen=True)
class ScenarioConfig:
    """Parsed values for every declared key plus the set given explicitly."""

    values: MappingProxyType
    explicit: frozenset = frozenset()
    source: str = "<string>"

    def __getitem__(self, name):
        if name not in KEYS:
            raise UnknownKey(f"unknown configuration key {name!r}")
        return self.values[name]

    @property
    def scenario(self) -> str | None:
        return self.values["scenario"]

    @property
    def scenario_id(self) -> str:
        return self["id"] or (self.scenario or "scenario")

    @property
    def c(self) -> float:
        return 1.0 if self["natural_units"] else self["c"]

    def with_values(self, **updates) -> "ScenarioConfig":
        vals = dict(self.values)
        for k, v in updates.items():
            k = k.replace("__", ".")
            if k not in KEYS:
                raise UnknownKey(f"unknown configuration key {k!r}")
            vals[k] = v
        return ScenarioConfig(MappingProxyType(vals), self.explicit | frozenset(updates), self.source)

    def validate(self) -> "ScenarioConfig":
        """Cross-key checks that a single line cannot express."""
        if self.scenario is None:
            raise ConfigError("scenario is required (one of: " + ", ".join(SCENARIOS) + ")")
        if self["natural_units"] and "c" in self.explicit and self.values["c"] != 1.0:
            raise RangeError("natural_units = true conflicts with c != 1")
        if self.scenario == "orbit":
            self.orbit_config()
        if self["potential.kind"] == "point_mass" and not self["potential.GM"] > 0:
            raise RangeError("potential.kind = point_mass needs potential.GM > 0")
        return self

    def orbit_config(self, simulate: bool = False) -> OrbitConfig:
        """The physical orbit; with ``simulate`` GM carries orbit.gm_scale."""
        GM = self["orbit.GM"]
        if GM is None:
            if self["orbit.M"] is None:
                raise ConfigError("orbit needs orbit.GM or orbit.M")
            GM = self["G"] * self["orbit.M"]
        if self["orbit.e"] >= 1.0:
            raise RangeError("orbit.e must be below 1 for a bound orbit")
        if simulate:
            GM *= self["orbit.gm_scale"]
        try:
            cfg = OrbitConfig(GM=GM, a=self["orbit.a"], e=self["orbit.e"], c=self.c, r0=self["orbit.r0"],
                              rdot=self["orbit.rdot"], phidot=self["orbit.phidot"],
                              revolutions=self["orbit.revolutions"], steps_per_rev=self["orbit.steps_per_rev"],
                              method=self["orbit.method"], project=self["orbit.project"],
                              rtol=self["integrator.rtol"], atol=self["integrator.atol"])
            cfg.initial_state()
        except ValueError as exc:
            raise RangeError(f"orbit: {exc}") from None
        return cfg


def parse_config(text: str, source: str = "<string>") -> ScenarioConfig:
    """Parse config text. Unknown or repeated keys and bad values raise."""
    values = {k: v.default for k, v in KEYS.items()}
    seen = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ParseError(f"line {lineno}: expected `key = value`, got {body!r}")
        name, raw = (part.strip() for part in body.split("=", 1))
        if not name:
            raise ParseError(f"line {lineno}: missing key")
        if name not in KEYS:
            raise UnknownKey(f"line {lineno}: unknown key {name!r} (see --help-config)")
        if not raw:
            raise ParseError(f"line {lineno}: missing value for {name}")
        if name in seen:
            raise ParseError(f"line {lineno}: {name} given twice")
        seen.add(name)
        values[name] = _convert(KEYS[name], raw, lineno)
    return ScenarioConfig(MappingProxyType(values), frozenset(seen), source)


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), os.fspath(path))


def shipped_config(name: str) -> str:
    """Path of a config bundled with the package, e.g. ``mercury``."""
    return os.path.join(os.path.dirname(__file__), "configs", f"{name}.cfg")


# reports


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(math.isfinite(self.value) and abs(self.value) <= self.tolerance)


@dataclass
class RunReport:
    scenario_id: str
    scenario: str
    checks: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)
    wall_time: float = 0.0

    def check(self, name: str, value, tolerance: float):
        self.checks.append(Check(name, float(value), float(tolerance)))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _aligned(pairs) -> list[str]:
    if not pairs:
        return []
    width = max(len(k) for k, _ in pairs)
    return [f"{k.ljust(width)} = {v}" for k, v in pairs]


def emit_report(report: RunReport, fmt: str = "text") -> bytes:
    """Byte-stable text or CSV rendering; wall time is left out on purpose."""
    if fmt == "csv":
        lines = ["name,value,tolerance,pass"]
        lines += [f"{c.name},{format_float(c.value)},{format_float(c.tolerance)},{'true' if c.passed else 'false'}"
                  for c in report.checks]
        return ("\n".join(lines) + "\n").encode()
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    head = [("id", report.scenario_id), ("scenario", report.scenario)]
    if report.checks or report.metrics or report.artifacts:
        head += [("status", "pass" if report.passed else "fail"), ("artifacts", " ".join(report.artifacts))]
    blocks = [_aligned(head)]
    if report.metrics:
        blocks.append(_aligned([(f"metric.{k}", format_float(v)) for k, v in report.metrics.items()]))
    for c in report.checks:
        blocks.append(_aligned([("check", c.name), ("value", format_float(c.value)),
                                ("tolerance", format_float(c.tolerance)), ("pass", "true" if c.passed else "false")]))
    return ("\n\n".join("\n".join(b) for b in blocks) + "\n").encode()


# builders shared by several scenarios


def build_field(cfg: ScenarioConfig) -> Callable | None:
    kind = cfg["field.kind"]
    if kind == "zero":
        return None
    if kind == "uniform":
        return em.uniform_field(cfg["field.E"], cfg["field.B"])
    if kind == "plane_wave":
        return em.plane_wave(cfg["field.direction"], cfg["field.polarization"], cfg["field.k"],
                             cfg["field.amplitude"])
    return em.coulomb_field(cfg["field.q"], cfg["field.center"])


def build_potential(cfg: ScenarioConfig) -> gr.NewtonianPotential | None:
    kind = cfg["potential.kind"]
    if kind == "zero":
        return None
    if kind == "uniform":
        return gr.uniform(cfg["potential.g"])
    return gr.point_mass(cfg["potential.GM"], cfg["potential.center"])


def _thin(w: Worldline, stride: int) -> Worldline:
    if stride <= 1:
        return w
    idx = np.arange(0, len(w), stride)
    if idx[-1] != len(w) - 1:
        idx = np.append(idx, len(w) - 1)
    extra = {k: np.asarray(v)[idx] for k, v in w.extra.items()}
    return Worldline(w.s[idx], w.x[idx], w.u[idx], w.norm_residual[idx], w.c, w.m, w.e, w.method, w.step, extra)


def _chart_columns(cfg: ScenarioConfig, w: Worldline) -> Worldline:
    if cfg["chart"] == "cartesian":
        return w
    chart = cv.chart_by_name(cfg["chart"])
    q = np.full((len(w), 3), np.nan)
    for i, x in enumerate(w.x):
        try:
            q[i] = chart.from_cartesian(x[:3])
        except (ZeroDivisionError, ValueError):
            pass
    return w.with_columns(q1=q[:, 0], q2=q[:, 1], q3=q[:, 2])


class _Writer:
    def __init__(self, directory: str, report: RunReport):
        self.directory = directory
        self.report = report

    def text(self, name: str, text: str):
        atomic_write_text(os.path.join(self.directory, name), text)
        self.report.artifacts.append(name)

    def worldline(self, name: str, cfg: ScenarioConfig, w: Worldline):
        self.text(name, _thin(_chart_columns(cfg, w), cfg["output.stride"]).to_csv_text())


def _rel_dev(a, b) -> float:
    scale = max(float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) / scale


# scenarios


def _run_orbit(cfg: ScenarioConfig, out: _Writer, report: RunReport, seed: int):
    physical = cfg.orbit_config()
    sim = cfg.orbit_config(simulate=True)
    w = run_orbit(sim)
    h_sim = float(w.extra["h_angmom"][0])
    closed = perihelion_shift_closed_form(sim.GM, h_sim, sim.c)
    prec = measure_precession(w, closed)
    a_phys = physical.semi_major_axis
    h_phys = kepler_angular_momentum(physical.GM, a_phys, physical.e)
    shift_phys = perihelion_shift_closed_form(physical.GM, h_phys, physical.c)
    eps, hh = w.extra["epsilon"], w.extra["h_angmom"]
    report.metrics.update({
        "gm_scale": cfg["orbit.gm_scale"],
        "measured_shift_per_rev": prec.shift_per_rev,
        "closed_form_shift_per_rev": closed,
        "measured_over_closed_form": prec.shift_per_rev / closed,
        "perihelia": float(prec.n_perihelia),
        "physical_shift_per_rev": shift_phys,
        "physical_revolutions_per_century": revolutions_per_century(physical.GM, a_phys),
        "physical_arcsec_per_century": precession_arcsec_per_century(shift_phys, physical.GM, a_phys),
    })
    report.check("precession_relative_deviation", prec.relative_deviation, cfg["orbit.tolerance"])
    report.check("energy_integral_drift", float(np.max(np.abs(eps - eps[0])) / abs(eps[0])),
                 cfg["orbit.drift_tolerance"])
    report.check("angular_momentum_drift", float(np.max(np.abs(hh - hh[0])) / abs(hh[0])),
                 cfg["orbit.drift_tolerance"])
    report.check("norm_residual", float(np.max(np.abs(w.norm_residual))), cfg["integrator.norm_tolerance"])
    out.worldline("orbit.csv", cfg, w)
    out.text("precession.txt", prec.to_text())


def _particle(cfg: ScenarioConfig, metric=None) -> ParticleState:
    return ParticleState.from_velocity(cfg["particle.position"], cfg["particle.velocity"], cfg.c, cfg["particle.t"],
                                       cfg["particle.m"], cfg["particle.e"], metric)


def _integrator_kw(cfg):
    return dict(method=cfg["integrator.method"], project=cfg["integrator.project"], rtol=cfg["integrator.rtol"],
                atol=cfg["integrator.atol"])


def _run_lorentz(cfg: ScenarioConfig, out: _Writer, report: RunReport, seed: int):
    c = cfg.c
    field_fn = build_field(cfg) or em.uniform_field()
    state = _particle(cfg)
    w = em.integrate_lorentz(state, field_fn, cfg["integrator.step"], cfg["integrator.steps"], c, **_integrator_kw(cfg))
    report.check("norm_residual", float(np.max(np.abs(w.norm_residual))), cfg["integrator.norm_tolerance"])
    if cfg["field.kind"] in ("zero", "uniform") and not np.any(cfg["field.E"]):
        # a pure magnetic field does no work: U^4 stays put
        report.check("energy_drift", float(np.max(np.abs(w.u[:, 3] - w.u[0, 3])) / w.u[0, 3]),
                     cfg["integrator.norm_tolerance"])
    report.metrics.update({"final_gamma": float(w.u[-1, 3] / c), "final_t": float(w.t[-1])})
    out.worldline("trajectory.csv", cfg, w)


def _fluid_fields(cfg: ScenarioConfig) -> fl.FluidFieldSet:
    rho, p0, sigma = cfg["fluid.rho"], cfg["fluid.p"], cfg["fluid.sigma"]
    gp = np.array(cfg["fluid.grad_p"])
    grad4 = np.append(gp, 0.0)
    kw = dict(W=build_potential(cfg), faraday=build_field(cfg))
    kw["rho"] = lambda x: rho
    if sigma != 0.0 or cfg["fluid.kind"] != "perfect":
        kw["sigma"] = lambda x: sigma
    if p0 != 0.0 or np.any(gp):
        kw["p"] = lambda x: p0 + float(gp @ np.asarray(x)[:3])
        kw["grad_p"] = lambda x: grad4
    return fl.FluidFieldSet(**kw)


def _run_charged_dust(cfg: ScenarioConfig, out: _Writer, report: RunReport, seed: int):
    c = cfg.c
    fields = _fluid_fields(cfg)
    metric = fields.metric_for(c)
    parcel = _particle(cfg, metric.g)
    ds, n, kw = cfg["integrator.step"], cfg["integrator.steps"], _integrator_kw(cfg)
    w = fl.charged_dust_streamline(parcel, fields, ds, n, c, **kw)
    report.check("norm_residual", float(np.max(np.abs(w.norm_residual))), cfg["integrator.norm_tolerance"])
    sigma, rho = cfg["fluid.sigma"], cfg["fluid.rho"]
    if fields.W is None and fields.faraday is not None and sigma != 0.0:
        # a dust parcel is a particle with e/m = sigma/rho
        twin = ParticleState(parcel.x, parcel.u, 1.0, sigma / rho)
        ref = em.integrate_lorentz(twin, fields.faraday, ds, n, c, **kw)
        report.check("lorentz_agreement", max(_rel_dev(w.x, ref.x), _rel_dev(w.u, ref.u)), 1e-10)
    if sigma == 0.0 or fields.faraday is None:
        ref = integrate_geodesic(metric, parcel, ds, n, c, **kw)
        report.check("geodesic_agreement", max(_rel_dev(w.x, ref.x), _rel_dev(w.u, ref.u)), 1e-12)
    out.worldline("streamline.csv", cfg, w)


def _run_fluid_streamline(cfg: ScenarioConfig, out: _Writer, report: RunReport, seed: int):
    c = cfg.c
    fields = _fluid_fields(cfg)
    metric = fields.metric_for(c)
    parcel = _particle(cfg, metric.g)
    w = fl.fluid_streamline(parcel, fields, cfg["integrator.step"], cfg["integrator.steps"], c, cfg["fluid.kind"],
                            **_integrator_kw(cfg))
    report.check("norm_residual", float(np.max(np.abs(w.norm_residual))), cfg["integrator.norm_tolerance"])
    report.metrics["final_gamma"] = float(w.u[-1, 3] / c)
    out.worldline("streamline.csv", cfg, w)


SWEEP_COLUMNS = ("index", "x1", "x2", "x3", "x4", "m1", "m2", "m3", "m4", "continuity")


def sweep_fields(cfg: ScenarioConfig) -> fl.FluidFieldSet:
    c = cfg.c
    rho0, p0 = cfg["sweep.rho"], cfg["sweep.p"]
    model = cfg["sweep.model"]
    kw = {}
    if cfg["sweep.flow"] == "uniform":
        v = np.array(cfg["sweep.velocity"])
        u0 = mk.lorentz_factor(v, c) * np.append(v, c)
        u = lambda x: u0  # noqa: E731
        sigma = lambda x: 0.0  # noqa: E731
        faraday = em.uniform_field()
    else:
        om, B0 = cfg["sweep.omega"], cfg["sweep.B"]

        def gamma(x):
            return 1.0 / math.sqrt(1.0 - om * om * (x[0] ** 2 + x[1] ** 2) / (c * c))

        def u(x):
            g = gamma(x)
            return np.array([-om * x[1] * g, om * x[0] * g, 0.0, c * g])

        def sigma(x):
            return -(rho0 + p0 / (c * c)) * c * gamma(x) * om / B0

        faraday = em.uniform_field([0, 0, 0], [0, 0, B0])
    if model in ("plasma", "viscous"):
        kw.update(sigma=sigma, faraday=faraday)
    if model == "viscous":
        eta, zeta = cfg["sweep.eta"], cfg["sweep.zeta"]
        kw.update(eta=lambda x: eta, zeta=lambda x: zeta)
    if model != "dust":
        kw["p"] = lambda x: p0
    return fl.FluidFieldSet(lambda x: rho0, u, **kw)


SWEEP_RESIDUALS = {
    "dust": (fl.euler_residual_dust, fl.continuity_residual_dust),
    "perfect": (fl.euler_residual_perfect_fluid, fl.continuity_residual_perfect_fluid),
    "plasma": (fl.plasma_euler_residual, fl.plasma_continuity_residual),
    "viscous": (fl.navier_stokes_residual, fl.viscous_continuity_residual),
}


def sweep_grid(cfg: ScenarioConfig) -> np.ndarray:
    n, ext = cfg["sweep.n"], cfg["sweep.extent"]
    axis = np.linspace(-ext, ext, n) if n > 1 else np.zeros(1)
    cx = np.array(cfg["sweep.center"])
    pts = [np.array([cx[0] + a, cx[1] + b, cx[2] + d, cfg["sweep.x4"]]) for a in axis for b in axis for d in axis]
    return np.array(pts)


def _run_residual_sweep(cfg: ScenarioConfig, out: _Writer, report: RunReport, seed: int):
    c, h = cfg.c, cfg["sweep.h"]
    fields = sweep_fields(cfg)
    mom_fn, cont_fn = SWEEP_RESIDUALS[cfg["sweep.model"]]
    lines = [",".join(SWEEP_COLUMNS)]
    worst_m = worst_c = 0.0
    for i, x in enumerate(sweep_grid(cfg)):
        m = mom_fn(fields, x, h, c).components
        r = cont_fn(fields, x, h, c)
        worst_m = max(worst_m, float(np.max(np.abs(m))))
        worst_c = max(worst_c, abs(r))
        lines.append(",".join([str(i)] + [format_float(v) for v in (*x, *m, r)]))
    report.metrics["events"] = float(len(lines) - 1)
    report.check("max_momentum_residual", worst_m, cfg["sweep.tolerance"])
    report.check("max_continuity_residual", worst_c, cfg["sweep.tolerance"])
    out.text("residuals.csv", "\n".join(lines) + "\n")


def _run_identity_suite(cfg: ScenarioConfig, out: _Writer, report: RunReport, seed: int):
    from .identities import run_identity_suite

    for name, value, tol in run_identity_suite(cfg, seed):
        report.check(name, value, tol)
    out.text("identities.csv", emit_report(report, "csv").decode())


RUNNERS = {
    "orbit": _run_orbit,
    "lorentz_trajectory": _run_lorentz,
    "charged_dust": _run_charged_dust,
    "fluid_streamline": _run_fluid_streamline,
    "residual_sweep": _run_residual_sweep,
    "identity_suite": _run_identity_suite,
}


def output_directory(cfg: ScenarioConfig, out: str | None = None) -> str:
    base = os.environ.get("RELMECH_OUT") or out or cfg["out"]
    return os.path.join(base, cfg.scenario_id)


def run(cfg: ScenarioConfig, out: str | None = None, seed: int | None = None) -> RunReport:
    """Run a validated scenario and write its artifacts plus report.txt and report.csv.

    Library errors propagate with the scenario id prefixed.
    """
    cfg.validate()
    directory = output_directory(cfg, out)
    report = RunReport(cfg.scenario_id, cfg.scenario)
    seed = cfg["seed"] if seed is None else seed
    t0 = time.perf_counter()
    try:
        RUNNERS[cfg.scenario](cfg, _Writer(directory, report), report, seed)
    except ConfigError:
        raise
    except Exception as exc:
        exc.args = (f"scenario {cfg.scenario_id!r}: {exc}",) + exc.args[1:]
        raise
    report.artifacts.extend(["report.txt", "report.csv"])
    atomic_write_text(os.path.join(directory, "report.txt"), emit_report(report, "text").decode())
    atomic_write_text(os.path.join(directory, "report.csv"), emit_report(report, "csv").decode())
    report.wall_time = time.perf_counter() - t0
    return report


def precession_summary(GM: float, a: float, e: float, c: float = 299792458.0) -> dict:
    """Closed-form perihelion advance for Kepler elements."""
    h = kepler_angular_momentum(GM, a, e)
    shift = perihelion_shift_closed_form(GM, h, c)
    return {
        "GM": GM, "a": a, "e": e, "c": c, "h": h,
        "shift_per_rev_rad": shift,
        "revolutions_per_century": revolutions_per_century(GM, a),
        "shift_arcsec_per_century": precession_arcsec_per_century(shift, GM, a),
    }


def simulated_precession(GM: float, a: float, e: float, revolutions: float, gm_scale: float = 1e4,
                         steps_per_rev: int = 2000, c: float = 299792458.0) -> dict:
    cfg = OrbitConfig(GM=GM * gm_scale, a=a, e=e, c=c, revolutions=revolutions, steps_per_rev=steps_per_rev)
    w = run_orbit(cfg)
    closed = perihelion_shift_closed_form(cfg.GM, float(w.extra["h_angmom"][0]), c)
    prec = measure_precession(w, closed)
    return {"gm_scale": gm_scale, "revolutions": revolutions, "measured_shift_per_rev": prec.shift_per_rev,
            "closed_form_shift_per_rev": closed, "relative_deviation": prec.relative_deviation}
