"""Randomised and convergence checks of the library's structural identities.

Each check returns ``(name, value, tolerance)``; it passes when
``|value| <= tolerance``. Used by the ``identity_suite`` scenario.
"""

import math

import numpy as np

from . import curvilinear as cv
from . import electromagnetism as em
from . import fluids as fl
from . import gravity as gr
from . import minkowski as mk
from .kinematics import energy


def random_lorentz(rng, max_beta: float = 0.9) -> mk.LorentzTransform:
    """A boost of random direction and speed composed with a random rotation."""
    n = rng.normal(size=3)
    v = n / np.linalg.norm(n) * rng.uniform(0.0, max_beta)
    rot = mk.make_rotation(rng.normal(size=3), rng.uniform(-math.pi, math.pi))
    return mk.compose(mk.make_boost(v, 1.0), rot)


def lorentz_checks(rng, samples: int, vectors: int):
    transforms = [random_lorentz(rng) for _ in range(samples)]
    preservation = max(mk.verify(t) for t in transforms)

    worst_inner = 0.0
    mismatches = 0
    vs = rng.normal(size=(vectors, 4))
    ws = rng.normal(size=(vectors, 4))
    # a few exact null vectors so the zero band is exercised
    vs[: vectors // 10, 3] = np.linalg.norm(vs[: vectors // 10, :3], axis=1)
    for i in range(vectors):
        L = transforms[i % samples].matrix
        v, w = vs[i], ws[i]
        Lv, Lw = L @ v, L @ w
        scale = np.linalg.norm(Lv) * np.linalg.norm(Lw) + np.linalg.norm(v) * np.linalg.norm(w)
        worst_inner = max(worst_inner, abs(mk.inner4(Lv, Lw) - mk.inner4(v, w)) / scale)
        mismatches += mk.classify(Lv) != mk.classify(v)

    worst_comp = 0.0
    for _ in range(min(samples, 200)):
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        b1, b2 = rng.uniform(-0.9, 0.9, size=2)
        composed = mk.compose(mk.make_boost(b2 * axis, 1.0), mk.make_boost(b1 * axis, 1.0)).matrix
        direct = mk.make_boost(mk.velocity_addition(b1, b2) * axis, 1.0).matrix
        worst_comp = max(worst_comp, float(np.max(np.abs(composed - direct))))
    return [("lorentz_metric_preservation", preservation, 1e-12),
            ("inner_product_invariance", worst_inner, 1e-12),
            ("classification_mismatches", float(mismatches), 0.0),
            ("boost_composition_vs_velocity_addition", worst_comp, 1e-12)]


def _random_quadratic(rng):
    """Polynomial a + b.x + x.C.x in the four event coordinates, with its gradient."""
    a, b, C = rng.normal(), rng.normal(size=4), rng.normal(size=(4, 4))
    C = 0.5 * (C + C.T)
    return (lambda x: a + b @ x + x @ C @ x), (lambda x: b + 2.0 * C @ x)


def gauge_check(rng, gauges: int):
    A_coef = rng.normal(size=(4, 4))
    A_quad = rng.normal(size=(4, 4, 4)) * 0.3

    def potential(x):
        return A_coef @ x + np.einsum("mij,i,j->m", A_quad, x, x)

    worst = 0.0
    for _ in range(gauges):
        lam, grad = _random_quadratic(rng)
        x = rng.normal(size=4)
        f0 = em.faraday_from_potential(potential, x).covariant
        f1 = em.faraday_from_potential(em.gauge_transform(potential, lam, grad), x).covariant
        worst = max(worst, float(np.max(np.abs(f1 - f0)) / np.max(np.abs(f0))))
    return [("gauge_invariance", worst, 1e-10)]


def convergence_order(errors) -> float:
    """Mean log2 ratio of successive errors under step halving."""
    e = np.asarray(errors, dtype=float)
    return float(np.mean(np.log2(e[:-1] / e[1:])))


def divergence_identity_orders():
    wave = em.plane_wave([1.0, 2.0, 0.5], [0.0, 0.3, -1.0], k=1.3)
    xw = np.array([0.3, -0.2, 0.4, 0.1])
    coul = em.coulomb_field(1.0)
    xc = np.array([0.9, 0.5, -0.7, 0.0])
    out = []
    for name, fn, x, hs in (("plane_wave", wave, xw, (0.2, 0.1, 0.05)),
                            ("coulomb", coul, xc, (0.1, 0.05, 0.025))):
        errs = [np.max(np.abs(em.divergence_identity_residual(fn, None, x, h, 1.0, check_cyclic=False)))
                for h in hs]
        out.append((f"em_divergence_order_{name}", convergence_order(errs) - 2.0, 0.2))
    return out


def energy_expansion_checks(m: float = 1.0, c: float = 1.0):
    betas = [0.2, 0.1, 0.05, 0.025]
    ratios = []
    for b in betas:
        E = energy(m, [b * c, 0.0, 0.0], c)
        ratios.append((E - m * c * c - 0.5 * m * b * b * c * c) / (m * c * c * b ** 4))
    spread = (max(ratios) - min(ratios)) / abs(np.mean(ratios))
    rest = energy(m, [0.0, 0.0, 0.0], c) - m * c * c
    return [("energy_quartic_remainder_spread", spread, 0.1), ("energy_at_rest_minus_mc2", rest, 0.0)]


def metric_compatibility_check():
    metric = gr.static_metric_from_W(gr.point_mass(0.1), 1.0)
    x = np.array([1.5, -0.8, 0.6, 0.2])
    d = gr.covariant_derivative_lower2(metric, metric.g, x, 1e-4)
    return [("metric_compatibility", float(np.max(np.abs(d))), 1e-7)]


def _const(v):
    return lambda x: v


def degeneration_check(c: float = 3.0):
    W = gr.uniform([0.02, -0.01, 0.03])
    rho = lambda x: 1.0 + 0.2 * math.sin(x[0]) * math.cos(x[3])  # noqa: E731
    p = lambda x: 0.3 + 0.1 * x[1] ** 2  # noqa: E731
    vel = lambda x: np.array([0.1 * math.cos(x[1]), 0.05 * x[0], 0.02 * x[3]])  # noqa: E731
    F = _const(em.assemble_faraday([0.3, 0.1, 0.0], [0.0, 0.2, 0.5]))

    def build(**kw):
        return fl.FluidFieldSet.from_velocity(rho, vel, c, W=W, **kw)

    base = build(p=p)
    viscous = build(p=p, sigma=_const(0.7), faraday=F, eta=_const(0.0), zeta=_const(0.0))
    plasma = build(p=p, sigma=_const(0.7), faraday=F)
    neutral = build(p=p, sigma=_const(0.0), faraday=F)
    dust_p0 = build(p=_const(0.0))
    dust = build()
    x, h = np.array([0.2, 0.1, -0.3, 0.4]), 1e-3
    diffs = [
        fl.navier_stokes_residual(viscous, x, h, c).components - fl.plasma_euler_residual(plasma, x, h, c).components,
        fl.plasma_euler_residual(neutral, x, h, c).components
        - fl.euler_residual_perfect_fluid(base, x, h, c).components,
        fl.euler_residual_perfect_fluid(dust_p0, x, h, c).components - fl.euler_residual_dust(dust, x, h, c).components,
        [fl.viscous_continuity_residual(viscous, x, h, c) - fl.plasma_continuity_residual(plasma, x, h, c),
         fl.plasma_continuity_residual(neutral, x, h, c) - fl.continuity_residual_perfect_fluid(base, x, h, c),
         fl.continuity_residual_perfect_fluid(dust_p0, x, h, c) - fl.continuity_residual_dust(dust, x, h, c)],
    ]
    return [("degeneration_chain_max_difference", max(float(np.max(np.abs(d))) for d in diffs), 0.0)]


def curvilinear_checks(chart_name: str):
    chart = cv.chart_by_name("spherical" if chart_name == "cartesian" else chart_name)
    q = np.array([1.4, 0.8, 0.3])
    ops = cv.orthogonal_operators(chart)
    X = chart.to_cartesian
    phi = lambda x: x[0] ** 2 * x[1] - x[2] ** 3 + x[0] * x[2]  # noqa: E731
    lap = lambda x: 2 * x[1] - 6 * x[2]  # noqa: E731
    v = lambda x: np.array([x[1] * x[2], x[0] ** 2, x[0] * x[1] * x[2]])  # noqa: E731
    curl = lambda x: np.array([x[0] * x[2], x[1] - x[1] * x[2], 2 * x[0] - x[2]])  # noqa: E731
    x = X(q)
    e = cv.unit_vectors(chart, q)
    v_phys = lambda y: cv.unit_vectors(chart, y) @ v(X(y))  # noqa: E731

    def rel(a, b):
        return float(np.max(np.abs(np.asarray(a) - np.asarray(b))) / max(1.0, np.max(np.abs(b))))

    sph = cv.orthogonal_operators(cv.spherical())
    gamma = cv.ricci_rotation(chart, q, tol=np.inf)
    return [
        ("laplacian_r_squared", abs(sph.laplacian(lambda y: y[0] ** 2, q) - 6.0) / 6.0, 1e-9),
        (f"{chart.name}_laplacian_vs_cartesian", rel(ops.laplacian(lambda y: phi(X(y)), q), lap(x)), 1e-6),
        (f"{chart.name}_div_vs_cartesian", rel(ops.div(v_phys, q, physical=True), x[0] * x[1]), 1e-6),
        (f"{chart.name}_curl_vs_cartesian", rel(ops.curl_phys(v_phys, q), e @ curl(x)), 1e-6),
        (f"{chart.name}_rotation_antisymmetry", float(np.max(np.abs(gamma + gamma.transpose(1, 0, 2)))), 1e-10),
    ]


def run_identity_suite(cfg, seed: int):
    rng = np.random.default_rng(seed)
    checks = []
    checks += lorentz_checks(rng, cfg["identity.samples"], cfg["identity.vectors"])
    checks += gauge_check(rng, cfg["identity.gauges"])
    checks += divergence_identity_orders()
    checks += energy_expansion_checks()
    checks += metric_compatibility_check()
    checks += degeneration_check()
    checks += curvilinear_checks(cfg["chart"])
    return checks
