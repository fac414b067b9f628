"""Spherical coordinates: connection, rotation coefficients and operators."""

import math

import numpy as np

from relmech import curvilinear as cv

chart = cv.spherical()
q = np.array([2.0, 1.0, 0.5])
r, th = q[:2]
gam = cv.curvilinear_christoffel(chart, q)
print("Selected connection symbols at r = 2, theta = 1")
print(f"  Gamma^r_(theta theta) = {gam[0, 1, 1]:+.6f}   (expect -r = {-r:+.6f})")
print(f"  Gamma^theta_(r theta) = {gam[1, 0, 1]:+.6f}   (expect 1/r = {1 / r:+.6f})")
print(f"  Gamma^phi_(theta phi) = {gam[2, 1, 2]:+.6f}   (expect cot theta = {1 / math.tan(th):+.6f})")

gamma = cv.ricci_rotation(chart, q)
print("\nRotation coefficients of the unit-vector triad")
print(f"  gamma_(theta)(r)(theta) = {gamma[1, 0, 1]:+.6f}   (expect -1/r)")
print(f"  antisymmetry error      = {np.abs(gamma + gamma.transpose(1, 0, 2)).max():.1e}")

ops = cv.orthogonal_operators(chart)
print("\nOperators")
print(f"  Laplacian r^2         = {ops.laplacian(lambda y: y[0] ** 2, q):.9f}")
print(f"  Laplacian 1/r         = {ops.laplacian(lambda y: 1 / y[0], q):.1e}")
print(f"  div of unit radial    = {ops.div(lambda y: np.array([1.0, 0, 0]), q, physical=True):.9f}  (2/r)")
rigid = lambda y: cv.unit_vectors(chart, y) @ np.cross([0, 0, 1.0], chart.to_cartesian(y))  # noqa: E731
print(f"  curl of rigid rotation = {np.round(cv.unit_vectors(chart, q).T @ ops.curl_phys(rigid, q), 9)}  (2 z-hat)")
