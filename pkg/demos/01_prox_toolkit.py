#!/usr/bin/env python3
"""Tour of the proximal-operator toolkit.

Every regularizer the library supports has an exact componentwise prox:
soft-thresholding for the l1 norm, clamping for box constraints, and
threshold-then-shrink for the elastic net.  The prox is the argmin of
psi(u) + ||u - z||^2 / (2 tau); we confirm that on a brute-force grid.
"""

import numpy as np

from vrprox import BoxIndicator, ElasticNet, L1, Zero, prox, psi_value

z = np.array([3.0, -0.5, 0.0, 1.2])
print("input z           :", z)

# The zero regularizer does nothing: its prox is the identity.
print("prox zero         :", prox(Zero(), z, tau=1.0))

# l1 soft-thresholding kills small coordinates and shrinks the rest.
l1 = L1(lam=1.0)
print("prox l1 (tau=1)   :", prox(l1, z, tau=1.0))
print("psi_value l1      :", psi_value(l1, z))

# Box projection clamps componentwise; the step size tau is irrelevant.
box = BoxIndicator(lo=-1.0, hi=1.0)
print("prox box (tau=0.7):", prox(box, z, tau=0.7))
print("prox box (tau=5)  :", prox(box, z, tau=5.0))

# Elastic net: soft-threshold at tau*lam1, then shrink by 1/(1 + tau*lam2).
enet = ElasticNet(lam1=1.0, lam2=1.0)
u = prox(enet, np.array([4.0]), tau=1.0)
print("prox enet of [4]  :", u)

# Sanity: the prox really minimizes psi(u) + (u-z)^2/(2 tau) -- grid search.
grid = np.arange(-1.0, 4.0, 1e-5)
objective = np.abs(grid) + 0.5 * grid**2 + (grid - 4.0) ** 2 / 2.0
print("grid argmin       :", grid[np.argmin(objective)], "(closed form gives", u[0], ")")

# Nonexpansiveness: prox maps never increase distances.
rng = np.random.default_rng(0)
z1, z2 = rng.normal(0, 3, 50), rng.normal(0, 3, 50)
for psi, name in [(l1, "l1"), (box, "box"), (enet, "enet")]:
    d_out = np.linalg.norm(prox(psi, z1, 0.8) - prox(psi, z2, 0.8))
    d_in = np.linalg.norm(z1 - z2)
    print(f"nonexpansive {name:4s}: |prox(z1)-prox(z2)| = {d_out:.4f} <= |z1-z2| = {d_in:.4f}")
