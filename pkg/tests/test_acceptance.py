"""End-to-end acceptance checks, one function per criterion.

Each criterion returns ``(passed, detail)``; :func:`run` adds the wall-clock
budget. Run with pytest (lines appear in the terminal summary) or directly
with ``python3 tests/test_acceptance.py``.
"""

import math
import time

import numpy as np
import pytest

from capillary_hk.flows import coverage_check, run_flow
from capillary_hk.geodesics import (
    exp_F_path,
    hyperbolic_geodesic,
    integrate_alpha_geodesic,
    polyline_hausdorff,
    randers_spray_geodesic,
    sectional_curvature,
    sphere_convexity,
)
from capillary_hk.metrics import (
    MetricSpec,
    NavigationData,
    dual_gauge,
    dual_gauge_gradient,
    fundamental_tensor,
    legendre,
    legendre_dual,
    randers_norm,
)
from capillary_hk.surfaces import cap_generator, perturb
from capillary_hk.verify import (
    convergence_sweep,
    hk_ball,
    minkowski_check,
    observed_orders,
    perturbed_family,
)

THETAS = (np.pi / 6, np.pi / 3, np.pi / 2, 2 * np.pi / 3)
SWEEP = (64, 128, 256, 512)


def _g_inner(nd, x, u, v):
    return np.sum(nd.base.diag(x) * u * v, axis=-1)


def _ball_points(rng, theta0, count, dim=3):
    x = np.empty((count, dim))
    x[:, :-1] = rng.uniform(-1.0, 1.0, (count, dim - 1))
    x[:, -1] = abs(math.cos(theta0)) + rng.uniform(0.05, 1.5, count)
    return x


def criterion_1():
    """Navigation identity, unit-sphere correspondence, tensor row, Legendre duality."""
    rng = np.random.default_rng(1)
    worst = {}

    def note(key, value):
        worst[key] = max(worst.get(key, 0.0), float(np.max(np.abs(value))))

    for theta0 in THETAS:
        for nd in (NavigationData.ball(theta0, 3), NavigationData.halfspace(theta0, 3)):
            x = _ball_points(rng, theta0, 1000)
            if nd.base.kind == "euclidean":
                x[:, -1] = rng.uniform(0.05, 2.0, 1000)
            xi = rng.normal(size=(1000, 3))
            F = randers_norm(nd, x, xi)
            # |xi/F + v0|_g = 1
            u = xi / F[:, None] + nd.wind
            note("navigation", np.sqrt(_g_inner(nd, x, u, u)) - 1)
            # g-unit V gives F(V - v0) = 1
            V = rng.normal(size=(1000, 3))
            V /= np.sqrt(_g_inner(nd, x, V, V))[:, None]
            zeta = V - nd.wind
            note("unit-sphere", randers_norm(nd, x, zeta) - 1)
            # g^F_zeta(zeta, W) = 0 for W g-orthogonal to zeta + v0, and the closed-form row
            W = rng.normal(size=(1000, 3))
            W -= (_g_inner(nd, x, W, V) / _g_inner(nd, x, V, V))[:, None] * V
            gF = fundamental_tensor(nd, x, zeta)
            note("tensor-orthogonality", np.einsum("ki,kij,kj->k", zeta, gF, W))
            V_flat = nd.base.diag(x) * V
            row = V_flat / (1 - _g_inner(nd, x, V, nd.wind))[:, None]
            note("tensor-row", np.einsum("ki,kij->kj", zeta, gF) - row)
            note("legendre-closed-form", legendre(nd, x, zeta) - row)
            note("dual-gradient", dual_gauge_gradient(nd, x, V_flat) - zeta)
            # Legendre round trip and F = F* o l
            w = legendre(nd, x, xi)
            back = legendre_dual(nd, x, w)
            note("round-trip", np.linalg.norm(back - xi, axis=1) / np.linalg.norm(xi, axis=1))
            note("dual-gauge", (dual_gauge(nd, x, w) - F) / F)
    ok = all(v <= 1e-9 for v in worst.values())
    return ok, " ".join(f"{k}={v:.1e}" for k, v in worst.items())


def criterion_2():
    """alpha-geodesics against Poincare geodesics; spray against reparametrised alpha paths."""
    rng = np.random.default_rng(2)
    hyp = 0.0
    m = MetricSpec("hyperbolic")
    for dim in (2, 3):
        for _ in range(3):
            p = np.r_[rng.uniform(-0.5, 0.5, dim - 1), rng.uniform(0.3, 1.5)]
            v = rng.normal(size=dim)
            v *= p[-1] / np.linalg.norm(v)
            path = integrate_alpha_geodesic(m, p, v, 1.0)
            hyp = max(hyp, np.max(np.linalg.norm(path.x - hyperbolic_geodesic(p, v, path.t), axis=1)))
    spray = 0.0
    for theta0 in (np.pi / 3, 2 * np.pi / 3):
        nd = NavigationData.ball(theta0, 2)
        p = np.array([0.1, abs(math.cos(theta0)) + 0.6])
        zeta = np.array([1.0, 0.4])
        zeta /= randers_norm(nd, p, zeta)
        a = exp_F_path(nd, p, zeta, 1.0, samples=401)
        b = randers_spray_geodesic(nd, p, zeta, 1.0, samples=400)
        spray = max(spray, polyline_hausdorff(a.x, b.x), np.linalg.norm(a.x[-1] - b.x[-1]))
    return hyp <= 1e-6 and spray <= 1e-6, f"hyperbolic={hyp:.1e} spray={spray:.1e}"


def criterion_3():
    """Coordinate-plane curvature, negativity, sphere pairings and C(pi/3, pi/4)."""
    rng = np.random.default_rng(3)
    closed = fd = 0.0
    all_negative = True
    for theta0 in THETAS:
        m = MetricSpec("alpha", theta0)
        for _ in range(25):
            x = np.r_[rng.uniform(-1, 1, 2), abs(math.cos(theta0)) + rng.uniform(0.05, 1.0)]
            rep = sectional_curvature(m, x, (0, 1))
            closed = max(closed, abs(rep.K_closed_form + 1))
            fd = max(fd, abs(rep.K_finite_difference + 1))
            for plane in ((0, 1), (0, 2), (1, 2)):
                r = sectional_curvature(m, x, plane)
                all_negative &= r.K_closed_form < 0 and r.K_finite_difference < 0
    positive = all(
        min(sphere_convexity(t, phi)) > 0
        for t in THETAS
        for phi in np.linspace(0.01, min(t, np.pi - t) - 0.01, 20)
    )
    C = sphere_convexity(np.pi / 3, np.pi / 4).C
    ok = closed <= 1e-5 and fd <= 1e-4 and all_negative and positive and abs(C - 2) <= 4 * np.finfo(float).eps
    return ok, f"closed={closed:.1e} fd={fd:.1e} negative={all_negative} positive={positive} C-2={C - 2:.1e}"


def criterion_4():
    """Half-space caps: closed forms and second-order convergence."""
    exact = {np.pi / 2: math.pi, np.pi / 3: 5 * math.pi / 16}
    parts, ok = [], True
    for theta0, value in exact.items():
        rows, orders = convergence_sweep("halfspace", theta0, 2, SWEEP, radius=1.0)
        lhs = np.array([r["lhs"] for r in rows]) - value
        rhs = np.array([r["rhs"] for r in rows]) - value
        rel = max(abs(lhs[-1]), abs(rhs[-1])) / value
        order = min(observed_orders(SWEEP, lhs).min(), observed_orders(SWEEP, rhs).min())
        ok &= rel <= 1e-3 and order >= 1.9
        parts.append(f"theta0={theta0:.4f} rel={rel:.1e} order={order:.2f}")
    return ok, "; ".join(parts)


def criterion_5():
    """Ball caps: equality at second order; admissible perturbations give a positive deficit."""
    parts, ok = [], True
    for theta0 in THETAS:
        rows, orders = convergence_sweep("ball", theta0, 2, SWEEP)
        rel = abs(rows[-1]["deficit"]) / rows[-1]["rhs"]
        order = min(orders["deficit"])
        ok &= rel <= 1e-3 and order >= 1.9
        parts.append(f"{theta0:.4f}: rel={rel:.1e} order={order:.2f}")
    deficits, rejected = [], 0
    for theta0 in THETAS:
        family, rej = perturbed_family("ball", theta0, count=5, resolution=512)
        rejected += len(rej)
        for _, s in family:
            rep = hk_ball(s, theta0)
            deficits.append(rep.deficit / rep.rhs)
    ok &= len(deficits) == 20 and min(deficits) > 0
    parts.append(f"perturbed {len(deficits)} caps, min deficit/rhs={min(deficits):.2e} ({rejected} draws rejected)")
    return ok, "; ".join(parts)


def criterion_6():
    """Minkowski residual decays on caps; mismatched angle stays away from zero."""
    worst_order = np.inf
    for kind, mode, R in (("ball", "ball-capillary", 0.3), ("halfspace", "halfspace-capillary", 1.0)):
        for theta0 in THETAS:
            res = [minkowski_check(cap_generator(mode, theta0, N, radius=R)) for N in SWEEP]
            worst_order = min(worst_order, observed_orders(SWEEP, res).min())
    control = []
    for N in SWEEP:
        s = cap_generator("ball-capillary", np.pi / 3, N)
        control.append(abs(minkowski_check(s, theta0=np.pi / 4)))
    bounded = min(control) > 1e-2 and control[-1] > 0.5 * control[0]
    return worst_order >= 1.9 and bounded, f"min order={worst_order:.2f} control={control[0]:.3e}..{control[-1]:.3e}"


def criterion_7():
    """Monotone Q + (n+1)/n V, equality on caps, half-space focal time."""
    cases = [
        ("free-boundary-ball", "ball-free-boundary", np.pi / 2, 0.3),
        ("capillary-ball", "ball-capillary", np.pi / 3, 0.3),
        ("capillary-ball", "ball-capillary", 2 * np.pi / 3, 0.3),
        ("capillary-halfspace", "halfspace-capillary", np.pi / 3, 1.0),
        ("capillary-halfspace", "halfspace-capillary", 2 * np.pi / 3, 1.0),
    ]
    ok, worst_mono, worst_eq, focal = True, 0.0, 0.0, []
    for mode, cap, theta0, R in cases:
        base = cap_generator(cap, theta0, 256)
        h = run_flow(base, mode)
        ok &= h.monotonicity_violation() <= h.tolerance and h.equality_residual() <= h.tolerance
        worst_mono = max(worst_mono, h.monotonicity_violation() / h.tolerance)
        worst_eq = max(worst_eq, h.equality_residual() / h.tolerance)
        if mode == "capillary-halfspace":
            ok &= abs(h.focal_time - R) <= h.dt
            focal.append(f"{h.focal_time - R:+.1e}/{h.dt:.1e}")
        for seed in (0, 1):
            hp = run_flow(perturb(base, 0.012 * R, seed=seed), mode)
            ok &= hp.monotonicity_violation() <= hp.tolerance
            worst_mono = max(worst_mono, hp.monotonicity_violation() / hp.tolerance)
    return ok, f"max violation/tol={worst_mono:.2e} max equality/tol={worst_eq:.2e} focal-R/dt={' '.join(focal)}"


def criterion_8():
    """Coverage of Omega by the swept family at 10^4 samples."""
    cases = [
        ("free-boundary-ball", "ball-free-boundary", np.pi / 2),
        ("capillary-ball", "ball-capillary", np.pi / 3),
        ("capillary-halfspace", "halfspace-capillary", np.pi / 3),
    ]
    ok, parts = True, []
    for mode, cap, theta0 in cases:
        cov = [coverage_check(cap_generator(cap, theta0, N), mode, samples=10000) for N in (128, 256)]
        # already complete at the coarse level counts as non-decreasing
        ok &= cov[1] >= 0.995 and cov[1] >= cov[0]
        parts.append(f"{mode}: {cov[0]:.4f}->{cov[1]:.4f}")
    return ok, "; ".join(parts)


CRITERIA = [
    (1, "navigation and duality identities", criterion_1, 1.0),
    (2, "geodesic oracles", criterion_2, 10.0),
    (3, "curvature and sphere convexity", criterion_3, 5.0),
    (4, "half-space equality and order", criterion_4, 10.0),
    (5, "ball inequality and equality", criterion_5, 60.0),
    (6, "Minkowski residual", criterion_6, 10.0),
    (7, "flow monotonicity", criterion_7, 60.0),
    (8, "coverage", criterion_8, 60.0),
]


def run(number):
    _, name, fn, budget = CRITERIA[number - 1]
    t0 = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - t0
    passed = bool(ok) and elapsed < budget
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number} {name}: {detail} ({elapsed:.2f}s / {budget:.0f}s)"
    return passed, line


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA])
def test_criterion(number, acceptance_log):
    passed, line = run(number)
    acceptance_log.append(line)
    print(line)
    assert passed, line


if __name__ == "__main__":
    results = [run(c[0]) for c in CRITERIA]
    for _, line in results:
        print(line)
    raise SystemExit(0 if all(p for p, _ in results) else 1)
