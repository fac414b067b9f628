import numpy as np
import pytest

from relmech import gravity as gr
from relmech.errors import SingularMetric, WeakFieldViolated
from relmech.minkowski import METRIC

C = 299792458.0
GM_SUN = 1.32712440018e20


def random_symmetric(rng, scale=0.1):
    a = rng.normal(size=(4, 4)) * scale
    return 0.5 * (a + a.T)


def test_flat_limit():
    m = gr.metric_from_phi(gr.GravPotential(lambda x: np.zeros((4, 4))))
    assert np.array_equal(m.g(np.zeros(4)), METRIC)


def test_phi44_block_result():
    eps = 0.01
    phi = np.zeros((4, 4))
    phi[3, 3] = eps
    g = gr.metric_from_phi(gr.GravPotential(lambda x: phi)).g(np.zeros(4))
    assert np.allclose(np.diag(g)[:3], 1 + eps / 2, rtol=0, atol=1e-16)
    assert g[3, 3] == pytest.approx(-1 + eps / 2, abs=1e-16)


def test_trace_reverse_involution():
    rng = np.random.default_rng(0)
    for _ in range(50):
        phi = random_symmetric(rng)
        assert np.allclose(gr.trace_reverse(gr.trace_reverse(phi)), phi, atol=1e-15)


def test_weak_field_gate():
    with pytest.raises(WeakFieldViolated):
        gr.GravPotential(lambda x: np.eye(4) * 0.6)(np.zeros(4))
    with pytest.raises(ValueError):
        gr.GravPotential(lambda x: np.triu(np.ones((4, 4))) * 0.1)(np.zeros(4))
    W = gr.point_mass(1.0)
    with pytest.raises(WeakFieldViolated):
        gr.static_metric_from_W(W, 1.0).g([1.5, 0, 0, 0])


def test_singular_metric_detected():
    m = gr.EffectiveMetric(lambda x: np.diag([1.0, 1.0, 1.0, 0.0]))
    with pytest.raises(SingularMetric):
        m.inverse(np.zeros(4))
    m = gr.EffectiveMetric(lambda x: np.eye(4))
    with pytest.raises(SingularMetric):
        m.inverse(np.zeros(4))


def test_static_metric_values():
    W0 = gr.zero()
    assert np.array_equal(gr.static_metric_from_W(W0, C).g(np.zeros(4)), METRIC)
    W = gr.point_mass(GM_SUN)
    r = 100 * GM_SUN / C ** 2  # 2GM/(c^2 r) = 0.02
    g = gr.static_metric_from_W(W, C).g([r, 0, 0, 0])
    assert g[3, 3] == pytest.approx(-(1 - 0.02), rel=1e-14)
    assert g[0, 0] == pytest.approx(1.02, rel=1e-14)


def test_static_metric_equals_phi44_form():
    W = gr.point_mass(3.0)
    c = 10.0
    x = np.array([1.0, 0.5, -0.3, 2.0])
    w = W(x)
    phi = np.zeros((4, 4))
    phi[3, 3] = 4 * abs(w) / c ** 2
    g1 = gr.metric_from_phi(gr.GravPotential(lambda y: phi)).g(x)
    g2 = gr.static_metric_from_W(W, c).g(x)
    assert np.max(np.abs(g1 - g2)) <= 1e-14
    ginv = gr.static_metric_from_W(W, c).inverse(x)
    assert np.max(np.abs(ginv @ g2 - np.eye(4))) <= 1e-12


def test_numeric_christoffel_flat_and_symmetric():
    gam = gr.christoffel_numeric(gr.EffectiveMetric.flat(), np.zeros(4))
    assert np.array_equal(gam, np.zeros((4, 4, 4)))
    rng = np.random.default_rng(1)
    A = random_symmetric(rng, 0.05)
    Bm = random_symmetric(rng, 0.05)
    phi = gr.GravPotential(lambda x: A * np.sin(x[0] + 2 * x[3]) + Bm * x[1] * x[2])
    gam = gr.christoffel_numeric(gr.metric_from_phi(phi), rng.normal(size=4) * 0.3, 1e-3)
    assert np.array_equal(gam, gam.transpose(0, 2, 1))


def test_closed_form_against_numeric():
    W = gr.point_mass(1.0)
    c = 3.0
    m = gr.static_metric_from_W(W, c)
    x = np.array([2.0, 1.0, -0.5, 0.0])
    exact = gr.christoffel_static_closed_form(W, x, c, exact=True)
    errs = []
    for h in (0.02, 0.01, 0.005):
        errs.append(np.max(np.abs(gr.christoffel_numeric(m, x, h) - exact)))
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.1)
    assert errs[1] / errs[2] == pytest.approx(4, rel=0.1)
    # the leading-order mixed family differs from the exact one at relative order 2W/c^2
    approx = gr.christoffel_static_closed_form(W, x, c)
    rel = abs(approx[3, 0, 3] / exact[3, 0, 3] - 1)
    assert rel == pytest.approx(abs(2 * W(x) / c ** 2), rel=1e-12)
    assert np.array_equal(approx[:3], exact[:3])


def test_closed_form_examples():
    W = gr.NewtonianPotential(lambda x: -4.0, lambda x: np.zeros(3))
    assert np.array_equal(gr.christoffel_static_closed_form(W, np.ones(3), 10.0), np.zeros((4, 4, 4)))
    r = 2.0e11
    gam = gr.christoffel_static_closed_form(gr.point_mass(GM_SUN), [r, 0, 0], C)
    assert gam[3, 0, 3] == pytest.approx(GM_SUN / (C ** 2 * r ** 2), rel=1e-15)
    assert gam[3, 3, 0] == gam[3, 0, 3]


def test_acceleration_fast_path_matches_christoffel_contraction():
    W = gr.point_mass(1.0)
    c = 5.0
    m = gr.static_metric_from_W(W, c)
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = np.append(rng.normal(size=3) + np.array([3, 0, 0]), 0.0)
        u = rng.normal(size=4)
        gam = m.christoffel(x)
        assert np.allclose(m.geodesic_acceleration(x, u), -np.einsum("abc,b,c->a", gam, u, u), rtol=1e-13, atol=1e-15)


def test_analytic_phi_gradient_christoffel():
    A = np.zeros((4, 4))
    A[3, 3] = 0.05
    A[0, 1] = A[1, 0] = 0.02

    def phi(x):
        return A * np.sin(x[0]) * np.cos(x[3])

    def dphi(x):
        return np.stack([A * np.cos(x[0]) * np.cos(x[3]), 0 * A, 0 * A, -A * np.sin(x[0]) * np.sin(x[3])])

    pot = gr.GravPotential(phi, dphi)
    analytic = gr.metric_from_phi(pot)
    numeric = gr.metric_from_phi(gr.GravPotential(phi))
    x = np.array([0.3, 0.2, 0.1, 0.4])
    assert np.max(np.abs(analytic.christoffel(x) - numeric.christoffel(x, 1e-4))) < 1e-9


def test_metric_compatibility():
    rng = np.random.default_rng(4)
    A, Bm = random_symmetric(rng, 0.05), random_symmetric(rng, 0.05)
    phi = gr.GravPotential(lambda x: A * np.sin(x[0] - x[3]) + Bm * np.cos(x[1] + x[2]))
    m = gr.metric_from_phi(phi)
    x = np.array([0.2, -0.1, 0.3, 0.5])
    # same stencil for the derivative and the Christoffel symbols makes this hold to rounding
    for h in (0.02, 0.01):
        assert np.max(np.abs(gr.covariant_derivative_lower2(m, m.g, x, h))) < 1e-12
    # the flat metric is not covariantly constant in a curved field
    W = gr.point_mass(1.0)
    ms = gr.static_metric_from_W(W, 3.0)
    nd = gr.covariant_derivative_lower2(ms, lambda y: METRIC, np.array([2.0, 0.0, 0.0, 0.0]), 1e-3)
    assert np.max(np.abs(nd)) > 1e-3


def test_physical_components():
    T = np.array([1.0, 2.0, 3.0, 4.0])
    assert np.array_equal(gr.physical_components(T, gr.zero(), np.zeros(3), C), T)
    W = gr.point_mass(1.0)
    c = 2.0
    x = np.array([3.0, 1.0, 0.0])
    m = gr.static_metric_from_W(W, c)
    rng = np.random.default_rng(5)
    for _ in range(20):
        T = rng.normal(size=4)
        Tb = gr.physical_components(T, W, x, c)
        assert T @ m.g(x) @ T == pytest.approx(Tb[:3] @ Tb[:3] - Tb[3] ** 2, rel=1e-12, abs=1e-12)
    u4 = c / np.sqrt(-m.g(x)[3, 3])
    assert gr.physical_components([0, 0, 0, u4], W, x, c)[3] == pytest.approx(c, rel=1e-15)


def test_laplace_residual():
    W = gr.point_mass(1.0)
    x = np.array([1.0, 0.7, -0.4])
    r1 = abs(gr.laplace_residual(W, x, 1e-2))
    r2 = abs(gr.laplace_residual(W, x, 5e-3))
    assert r1 / r2 == pytest.approx(4, rel=0.1)
    assert gr.laplace_residual(gr.uniform([0, 0, -9.8]), x, 1e-3) == pytest.approx(0, abs=1e-8)
    quad = gr.from_function(lambda y: y @ y)
    assert gr.laplace_residual(quad, x, 1e-3) == pytest.approx(6, abs=1e-6)


def test_uniform_potential_sign():
    W = gr.uniform([0, 0, -9.8])
    assert W([0, 0, 2.0]) == pytest.approx(19.6)
    assert np.allclose(W.grad([0, 0, 0]), [0, 0, 9.8])
