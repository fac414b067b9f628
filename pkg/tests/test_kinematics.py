import numpy as np
import pytest

from relmech import kinematics as kin
from relmech.errors import NotTimelike, OrthogonalityViolated, SpeedNotSubluminal, NotNormalized
from relmech.minkowski import inner4
from relmech.worldline import ParticleState, read_csv

C = 299792458.0


def test_proper_time_rest_clock():
    table = kin.proper_time_table(lambda u: np.array([0, 0, 0, C * u]), 0.0, 5.0, 10, C)
    assert np.allclose(table.s, table.param, rtol=1e-9, atol=0)
    assert table.s[0] == 0.0


def test_proper_time_uniform_motion():
    beta = 0.6
    table = kin.proper_time_table(lambda t: np.array([beta * C * t, 0, 0, C * t]), 0.0, 3.0, 8, C)
    assert table.s[-1] == pytest.approx(0.8 * 3.0, rel=1e-10)


def test_proper_time_simpson_fourth_order():
    # circular motion at varying speed: x = R sin(w t^2)
    R, w = 0.3, 1.0

    def curve(t):
        return np.array([R * np.sin(w * t * t), R * np.cos(w * t * t), 0.0, t])

    def deriv(t):
        return np.array([2 * R * w * t * np.cos(w * t * t), -2 * R * w * t * np.sin(w * t * t), 0.0, 1.0])

    from scipy.integrate import quad
    exact = quad(lambda t: np.sqrt(1 - (2 * R * w * t) ** 2), 0, 1.2, epsabs=1e-14)[0]
    e1 = abs(kin.proper_time_table(curve, 0, 1.2, 16, 1.0, deriv).s[-1] - exact)
    e2 = abs(kin.proper_time_table(curve, 0, 1.2, 32, 1.0, deriv).s[-1] - exact)
    assert e1 / e2 > 12


def test_proper_time_null_path_rejected():
    with pytest.raises(NotTimelike):
        kin.proper_time_table(lambda u: np.array([C * u, 0, 0, C * u]), 0.0, 1.0, 4, C)


def test_four_velocity_examples():
    assert np.array_equal(kin.four_velocity_from_coordinate_velocity([0, 0, 0], C), [0, 0, 0, C])
    U = kin.four_velocity_from_coordinate_velocity([0.6 * C, 0, 0], C)
    assert np.allclose(U, [0.75 * C, 0, 0, 1.25 * C], rtol=1e-15)
    rng = np.random.default_rng(0)
    for _ in range(200):
        v = rng.normal(size=3)
        v *= rng.uniform(0, 0.999) * C / np.linalg.norm(v)
        back = kin.coordinate_velocity_from_four_velocity(kin.four_velocity_from_coordinate_velocity(v, C), C)
        assert np.max(np.abs(back - v)) <= 1e-14 * np.linalg.norm(v) * 4
    with pytest.raises(SpeedNotSubluminal):
        kin.four_velocity_from_coordinate_velocity([C, 0, 0], C)


def test_newtonian_force_map():
    f = np.array([1.0, 2.0, 3.0])
    F = kin.newtonian_force_to_relativistic(f, [0, 0, 0], C)
    assert np.array_equal(F, [1.0, 2.0, 3.0, 0.0])
    F = kin.newtonian_force_to_relativistic([0, 1.0, 0], [0.5 * C, 0, 0], C)
    assert F[3] == 0.0
    v = np.array([0.6 * C, 0, 0])
    F = kin.newtonian_force_to_relativistic(f, v, C)
    assert F[0] == pytest.approx(1.25 * f[0], rel=1e-15)
    U = kin.four_velocity_from_coordinate_velocity(v, C)
    assert abs(inner4(F, U)) < 1e-12 * np.linalg.norm(F) * np.linalg.norm(U)
    assert np.allclose(kin.relativistic_force_to_newtonian(F, v, C), f, rtol=1e-15)


def test_energy_values():
    assert kin.energy(1.0, [0, 0, 0], C) == pytest.approx(8.98755178737e16, rel=1e-12)
    m, c = 2.0, 1.0
    for beta in (0.1, 0.05, 0.01):
        excess = kin.energy(m, [beta, 0, 0], c) - m - 0.5 * m * beta ** 2
        assert excess >= 0
        # leading correction 3/8 m beta^4
        assert excess / (m * beta ** 4) == pytest.approx(3 / 8, rel=0.02)
    assert kin.energy(1.0, [0.99, 0, 0], 1.0) == pytest.approx(7.0888120500833, rel=1e-10)
    with pytest.raises(SpeedNotSubluminal):
        kin.energy(1.0, [1.0, 0, 0], 1.0)


def _rest(c=1.0, m=1.0):
    return ParticleState([0, 0, 0, 0], [0, 0, 0, c], m)


def test_free_particle_straight_line():
    s0 = ParticleState.from_velocity([0, 0, 0], [0.3, -0.4, 0.1], 1.0)
    w = kin.integrate_relativistic(s0, lambda x, u: np.zeros(4), 0.01, 500, 1.0)
    assert np.max(np.abs(w.u - s0.u)) <= 1e-12
    assert np.allclose(w.x[-1], s0.u * 5.0, atol=1e-12)


def hyperbolic_force(a0, c=1.0, m=1.0):
    def force(x, u):
        return m * a0 * np.array([u[3] / c, 0, 0, u[0] / c])
    return force


def test_hyperbolic_motion_matches_cosh():
    a0 = 1.0
    w = kin.integrate_relativistic(_rest(), hyperbolic_force(a0), 0.001, 1000, 1.0)
    x_exact = (np.cosh(a0 * 1.0) - 1) / a0
    assert w.x[-1, 0] == pytest.approx(x_exact, rel=1e-8)
    assert w.x[-1, 3] == pytest.approx(np.sinh(1.0), rel=1e-8)


def test_hyperbolic_motion_adaptive():
    w = kin.integrate_relativistic(_rest(), hyperbolic_force(1.0), 0.05, 20, 1.0, method="rkf45")
    assert w.s[-1] == pytest.approx(1.0, rel=1e-12)
    assert w.x[-1, 0] == pytest.approx(np.cosh(1.0) - 1, rel=1e-8)


def test_normalization_drift_long_run():
    w = kin.integrate_relativistic(_rest(), hyperbolic_force(0.3), 1e-4, 100000, 1.0)
    assert np.max(np.abs(w.norm_residual)) <= 1e-9


def test_projection_keeps_mass_shell():
    w = kin.integrate_relativistic(_rest(), hyperbolic_force(0.3), 0.05, 200, 1.0, project=True)
    assert np.max(np.abs(w.norm_residual)) <= 1e-12


def test_four_acceleration_orthogonal_and_time_dilation():
    w = kin.integrate_relativistic(_rest(), hyperbolic_force(1.0), 1e-3, 2000, 1.0)
    ds = w.step
    acc = (w.u[2:] - w.u[:-2]) / (2 * ds)
    for U, A in zip(w.u[1:-1], acc):
        assert abs(inner4(U, A)) <= 1e-8 * np.linalg.norm(A)
    dsdt = np.diff(w.s) / np.diff(w.t)
    assert np.all(dsdt > 0) and np.all(dsdt <= 1.0)


def test_malformed_force_rejected():
    with pytest.raises(OrthogonalityViolated):
        kin.integrate_relativistic(_rest(), lambda x, u: np.array([0, 0, 0, 1.0]), 0.1, 3, 1.0)


def test_unnormalized_state_rejected():
    with pytest.raises(NotNormalized):
        kin.integrate_relativistic(ParticleState([0, 0, 0, 0], [0, 0, 0, 2.0]), lambda x, u: np.zeros(4), 0.1, 3, 1.0)


def test_newtonian_limit_scaling():
    # constant Newtonian force f = (1, 0, 0) per unit mass; after coordinate time T the
    # relativistic trajectory differs from x = T^2/2 by O(1/c^2)
    T = 1.0

    def run(c):
        def force(x, u):
            v = c * u[:3] / u[3]
            return kin.newtonian_force_to_relativistic([1.0, 0, 0], v, c)
        s0 = ParticleState([0, 0, 0, 0], [0, 0, 0, c])
        w = kin.integrate_relativistic(s0, force, T / 2000, 2000, c)
        x = np.interp(T, w.t, w.x[:, 0])
        return abs(x - 0.5 * T * T)

    d1, d2 = run(10.0), run(20.0)
    assert d1 / d2 == pytest.approx(4.0, rel=0.15)


def test_energy_rate_matches_work():
    c = 1.0
    f = np.array([0.4, -0.2, 0.1])

    def force(x, u):
        return kin.newtonian_force_to_relativistic(f, c * u[:3] / u[3], c)

    s0 = ParticleState.from_velocity([0, 0, 0], [0.2, 0.3, 0.0], c)
    w = kin.integrate_relativistic(s0, force, 1e-3, 1000, c)
    E = w.u[:, 3] * c  # m c^2 gamma with m = 1
    dEdt = np.gradient(E, w.t)
    v = c * w.u[:, :3] / w.u[:, 3:4]
    assert np.allclose(dEdt[1:-1], (v @ f)[1:-1], atol=1e-6)


def test_worldline_csv_round_trip(tmp_path):
    w = kin.integrate_relativistic(_rest(), hyperbolic_force(1.0), 0.1, 10, 1.0)
    path = tmp_path / "w.csv"
    w.to_csv(path)
    text = path.read_text()
    assert text.splitlines()[0] == "s,t,x1,x2,x3,x4,u1,u2,u3,u4,norm_residual"
    data = read_csv(path)
    assert np.array_equal(data["x1"], w.x[:, 0])
    assert np.array_equal(data["u4"], w.u[:, 3])
    w.to_csv(path)
    assert path.read_text() == text
