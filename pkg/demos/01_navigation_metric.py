"""
Randers metrics from navigation data
====================================

A vertical wind blowing through hyperbolic (or Euclidean) space turns the
sea metric into a Randers gauge ``F = sqrt(alpha) + beta``. This script
walks through the gauge, its Legendre transform and the unit normal used
by the capillary flows.
"""

# %%
# Navigation data and the gauge
# -----------------------------
# In the ball setting the sea is the Poincare half-space and the wind is
# ``cos(theta0) E``. At height 1 the sea metric is Euclidean, so values are
# easy to check by hand.

import numpy as np

from capillary_hk import (
    NavigationData,
    dual_gauge,
    finsler_normal,
    fundamental_tensor,
    legendre,
    legendre_dual,
    randers_eval,
)

theta0 = np.pi / 3
nd = NavigationData.ball(theta0, dim=3)
x = np.array([0.0, 0.0, 1.0])

for name, xi in [("E1", [1.0, 0.0, 0.0]), ("E3", [0.0, 0.0, 1.0]), ("-E3", [0.0, 0.0, -1.0])]:
    g = randers_eval(nd, x, np.array(xi))
    print(f"F(x, {name:>3}) = {float(g.F):.6f}   alpha part {float(g.alpha_part):.4f}   beta part {float(g.beta_part):+.4f}")

# upwind is cheap and downwind is expensive: F(E3) = 1/(1 - c) = 2

# %%
# The navigation identity
# -----------------------
# Walking at unit speed ``xi/F`` while the wind pushes by ``v0`` gives a
# velocity of unit sea length.

rng = np.random.default_rng(0)
pts = np.c_[rng.uniform(-1, 1, (5, 2)), rng.uniform(0.6, 2.0, 5)]
xis = rng.normal(size=(5, 3))
F = randers_eval(nd, pts, xis).F
ground = xis / F[:, None] + nd.wind
sea = np.sqrt(np.sum(nd.base.diag(pts) * ground ** 2, axis=1))
print("sea length of xi/F + v0:", np.round(sea, 14))

# %%
# Legendre transform and its inverse
# ----------------------------------
# ``legendre`` is the fibre derivative of ``F^2/2``; the inverse is found by
# damped Newton with the fundamental tensor as Jacobian.

xi = np.array([0.3, -0.2, 0.5])
w = legendre(nd, x, xi)
back = legendre_dual(nd, x, w)
print("xi           ", xi)
print("l^-1(l(xi))  ", back)
print("F(xi) - F*(l(xi)) =", float(randers_eval(nd, x, xi).F - dual_gauge(nd, x, w)))
print("Euler check g_xi(xi, xi) - F^2 =", float(xi @ fundamental_tensor(nd, x, xi) @ xi - randers_eval(nd, x, xi).F ** 2))

# %%
# The F-unit normal
# -----------------
# For a hypersurface with Euclidean unit normal ``n`` the F-normal is
# ``x_{n+1} n - v0``. It has unit F-length and the fundamental tensor makes
# it orthogonal to the tangent space.

n_delta = np.array([0.6, 0.0, 0.8])
zeta = finsler_normal(nd, x, n_delta)
tangent = np.array([0.8, 0.0, -0.6])
print("n_F =", zeta, " F(n_F) =", float(randers_eval(nd, x, zeta).F))
print("g^F(n_F, tangent) =", float(zeta @ fundamental_tensor(nd, x, zeta) @ tangent))
