"""How the relativistic fluid equations reduce to Newton's as c grows.

For one fixed flow in a point-mass field the Newtonian Euler defect
rho (dV/dt + grad W) + grad p shrinks like 1/c^2, and what remains after
subtracting the collected 1/c^2 corrections shrinks like 1/c^4. The
degenerate limits of the residual family coincide bit for bit.
"""

import math

import numpy as np

from relmech import fluids as fl
from relmech import gravity as gr
from relmech.worldline import normalized_velocity


def pieces(c):
    fs = fl.FluidFieldSet(lambda x: 1.0 + 0.1 * x[1], W=gr.point_mass(1.0),
                          p=lambda x: 0.5 + 0.2 * math.sin(x[0]) * math.cos(x[3] / c),
                          grad_p=lambda x: np.array([0.2 * math.cos(x[0]) * math.cos(x[3] / c), 0, 0,
                                                     -0.2 * math.sin(x[0]) * math.sin(x[3] / c) / c]))
    x = np.array([3.0, 1.0, 0.5, 0.2 * c])
    V = np.array([0.4, -0.3, 0.2])
    u = normalized_velocity(V, c, fs.metric_for(c).g(x))
    dV = fl.three_acceleration(u, fl.streamline_acceleration(fs, x, u, c, "perfect"), c)
    D = fl.newtonian_euler_defect(fs, x, V, dV, c)
    return np.linalg.norm(D), np.linalg.norm(D - fl.euler_correction_bundle(fs, x, V, dV, c))


print(f"{'c':>6} {'|defect|':>12} {'|defect - corrections|':>24}")
prev = None
for c in (10.0, 20.0, 40.0, 80.0):
    d, g = pieces(c)
    ratio = "" if prev is None else f"   ratios {prev[0] / d:5.2f} {prev[1] / g:6.2f}"
    print(f"{c:6.0f} {d:12.3e} {g:24.3e}{ratio}")
    prev = (d, g)

c = 3.0
fields = fl.FluidFieldSet.from_velocity(lambda x: 1.0 + 0.2 * math.cos(x[0]), lambda x: [0.2 * math.sin(x[1]), 0, 0.1],
                                        c, p=lambda x: 0.3)
neutral = fl.FluidFieldSet.from_velocity(fields.rho, lambda x: [0.2 * math.sin(x[1]), 0, 0.1], c,
                                         p=lambda x: 0.3, sigma=lambda x: 0.0,
                                         faraday=lambda x: np.zeros((4, 4)))
x = np.array([0.1, 0.2, 0.3, 0.4])
same = np.array_equal(fl.plasma_euler_residual(neutral, x, 1e-3, c).components,
                      fl.euler_residual_perfect_fluid(fields, x, 1e-3, c).components)
print(f"\nUncharged plasma residual equals the perfect-fluid residual bitwise: {same}")
