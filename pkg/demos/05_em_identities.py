"""Gauge freedom and the field's energy-momentum balance, checked numerically."""

import numpy as np

from relmech import electromagnetism as em

rng = np.random.default_rng(0)
lin = rng.normal(size=(4, 4))


def potential(x):
    return lin @ x + 0.1 * np.array([x[1] ** 2, x[2] * x[3], x[0] ** 2, x[1] * x[2]])


def gauge(x):
    return np.sin(x[0]) * x[3] + x[1] ** 3


f0 = em.faraday_from_potential(potential, np.array([0.2, 0.1, -0.3, 0.5]))
f1 = em.faraday_from_potential(em.gauge_transform(potential, gauge), np.array([0.2, 0.1, -0.3, 0.5]))
print(f"Field change under a gauge transformation: {np.abs(f1.covariant - f0.covariant).max():.1e}")

coulomb = em.coulomb_field(1.0)
x = np.array([0.9, 0.5, -0.7, 0.0])
print("\nCoulomb field away from the charge: divergence of the stress-energy tensor under step halving")
prev = None
for h in (0.1, 0.05, 0.025):
    err = np.abs(em.divergence_identity_residual(coulomb, None, x, h, 1.0, check_cyclic=False)).max()
    note = "" if prev is None else f"   ratio {prev / err:.2f}"
    print(f"  h = {h:<7} residual {err:.3e}{note}")
    prev = err
print("Halving h cuts the residual by four, as a centred stencil should.")
wave = em.plane_wave([1.0, 2.0, 0.5], [0.0, 0.3, -1.0], k=1.3)
res = em.maxwell_residuals(wave, None, x, 1e-3, 1.0)
print(f"Plane-wave Maxwell residuals at h = 1e-3: inhomogeneous {np.abs(res.inhomogeneous).max():.1e}, "
      f"cyclic {np.abs(res.cyclic).max():.1e}")
