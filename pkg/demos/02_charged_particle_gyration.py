"""A charge in uniform fields: gyration, then E x B drift.

Checks the integrated radius against gamma m v / (e B) and the drift
velocity against c E x B / B^2, in units with c = 1.
"""

import numpy as np

from relmech.electromagnetism import em_stress_energy, integrate_lorentz, uniform_field
from relmech.worldline import ParticleState, normalized_velocity

c = 1.0
v = 0.6
state = ParticleState(np.zeros(4), normalized_velocity([v, 0, 0], c), m=1.0, e=1.0)
B = 2.0
w = integrate_lorentz(state, uniform_field(B=[0, 0, B]), 1e-3, 20000, c, project=True)
gamma = 1 / np.sqrt(1 - v * v)
radius = gamma * v / B
centre = np.array([0.0, -radius])
r = np.hypot(w.x[:, 0] - centre[0], w.x[:, 1] - centre[1])
print("Pure magnetic field")
print(f"  predicted gyroradius  {radius:.10f}")
print(f"  integrated radius     {r.min():.10f} .. {r.max():.10f}")
print(f"  gamma drift           {np.ptp(w.u[:, 3]) / c:.1e} (a magnetic field does no work)")

E = np.array([0, 0.5, 0])
Bv = np.array([0, 0, 1.0])
rest = ParticleState(np.zeros(4), normalized_velocity([0, 0, 0], c), m=1.0, e=1.0)
w2 = integrate_lorentz(rest, uniform_field(E=E, B=Bv), 1e-3, 200000, c)
t = w2.t
drift = np.polyfit(t, w2.x[:, 0], 1)[0]
print("\nCrossed fields, particle released at rest")
print(f"  predicted drift       {c * np.cross(E, Bv)[0] / (Bv @ Bv):.4f} c along x1")
print(f"  fitted drift          {drift:.4f} c")

T = em_stress_energy(uniform_field(E=E, B=Bv)(None))
print(f"\nField energy density {T.energy_density:.5f}, Poynting flux {np.round(T.poynting, 5)}, "
      f"trace {T.trace():.1e}")
