"""Geodesics of the diagonal metrics and of the Randers gauge, plus curvature.

Two independent routes to Randers geodesics are provided:

* :func:`exp_F` follows the geodesic of the Riemannian part ``alpha`` and
  reparameterises it by F-arclength (valid because ``beta`` is closed);
* :func:`randers_spray_geodesic` integrates the Euler-Lagrange equations of
  ``F^2/2`` directly, with finite-difference derivatives in ``x``.
"""

import csv
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .exceptions import DomainExitError, StepUnderflowError
from .metrics import MetricSpec, fundamental_tensor, legendre, randers_norm


def christoffel(m, x):
    """Christoffel symbols ``Gamma[..., k, i, j]`` of a diagonal height metric.

    Only three families are non-zero (``i < d - 1``, ``z`` the last index)::

        Gamma^z_ii = -A'/(2B),  Gamma^i_iz = Gamma^i_zi = A'/(2A),  Gamma^z_zz = B'/(2B)
    """
    x = np.asarray(x, dtype=float)
    m.check_domain(x)
    d = x.shape[-1]
    z = x[..., -1]
    a, b = m.coefficients(z)
    da, db, _ = m.derivatives(z)
    gam = np.zeros(x.shape[:-1] + (d, d, d))
    for i in range(d - 1):
        gam[..., -1, i, i] = -0.5 * da / b
        gam[..., i, i, -1] = 0.5 * da / a
        gam[..., i, -1, i] = 0.5 * da / a
    gam[..., -1, -1, -1] = 0.5 * db / b
    return gam


def geodesic_acceleration(m, x, v):
    """``-Gamma(x)(v, v)`` without forming the full symbol table."""
    z = x[..., -1]
    a, b = m.coefficients(z)
    da, db, _ = m.derivatives(z)
    acc = np.empty_like(v)
    vz = v[..., -1]
    acc[..., :-1] = -(da / a)[..., None] * v[..., :-1] * vz[..., None]
    acc[..., -1] = 0.5 * (da / b) * np.sum(v[..., :-1] ** 2, axis=-1) - 0.5 * (db / b) * vz ** 2
    return acc


def _rk4_step(rhs, y, h):
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * h * k1)
    k3 = rhs(y + 0.5 * h * k2)
    k4 = rhs(y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


@dataclass
class GeodesicPath:
    """Sampled geodesic: parameters ``t``, positions ``x`` and velocities ``v``."""

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    metric_tag: str
    parameterization: str
    step: float = np.nan
    info: dict = field(default_factory=dict)

    def to_csv(self, path):
        d = self.x.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"x{i + 1}" for i in range(d)])
            for t, x in zip(self.t, self.x):
                w.writerow([repr(float(t))] + [repr(float(c)) for c in x])


def _speed(m, x, v):
    return np.sqrt(np.sum(m.diag(x) * v * v, axis=-1))


# heights closer than this to the lower bound count as leaving the domain;
# the metric coefficients lose all relative accuracy there
BOUNDARY_MARGIN = 1e-9


def _integrate_fixed(m, p, v, t_end, h):
    steps = max(1, int(np.ceil(t_end / h - 1e-12)))
    h = t_end / steps
    d = p.shape[0]
    bound = m.lower_bound() + BOUNDARY_MARGIN

    def rhs(y):
        return np.concatenate([y[d:], geodesic_acceleration(m, y[:d], y[d:])])

    ys = np.empty((steps + 1, 2 * d))
    ys[0] = np.concatenate([p, v])
    for k in range(steps):
        ys[k + 1] = _rk4_step(rhs, ys[k], h)
        if not ys[k + 1, d - 1] > bound or not np.all(np.isfinite(ys[k + 1])):
            raise DomainExitError(f"geodesic left the domain of the {m.kind} metric", exit_time=k * h)
    return np.linspace(0.0, t_end, steps + 1), ys[:, :d], ys[:, d:], h


def integrate_alpha_geodesic(m, p, v, t_end, step=1e-3, tol=1e-8, min_step=1e-6):
    """Solve ``x'' + Gamma(x)(x', x') = 0`` with classical RK4.

    The step is halved until the relative drift of the conserved speed stays
    below ``tol`` per unit time. ``info["richardson_error"]`` holds the
    step-doubling estimate of the endpoint error at the accepted step.
    """
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    if not np.linalg.norm(v) > 0:
        raise ValueError("initial velocity must be non-zero")
    m.check_domain(p)
    h = float(step)
    while True:
        t, x, vel, h_used = _integrate_fixed(m, p, v, t_end, h)
        sp = _speed(m, x, vel)
        drift = float(np.max(np.abs(sp / sp[0] - 1.0)))
        if drift <= tol * max(1.0, t_end):
            break
        h *= 0.5
        if h < min_step:
            raise StepUnderflowError(f"speed drift {drift:.2e} above tolerance at step {h:.2e}")
    coarse = _integrate_fixed(m, p, v, t_end, 2 * h_used)[1][-1]
    info = {"speed_drift": drift, "richardson_error": float(np.linalg.norm(x[-1] - coarse) / 15.0)}
    return GeodesicPath(t, x, vel, "alpha", "affine", h_used, info)


def hyperbolic_geodesic(p, v, t):
    """Closed-form geodesic of the Poincare half-space metric ``z^-2 delta``.

    Returns points at parameters ``t`` for the geodesic with ``x(0) = p`` and
    ``x'(0) = v`` (affine parameter, so the hyperbolic speed is ``|v|/p_z``).
    """
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    z0 = p[-1]
    vn = np.linalg.norm(v)
    s = vn / z0
    horiz = v[:-1]
    a = np.linalg.norm(horiz)
    out = np.empty((t.size, p.size))
    if a <= 1e-15 * vn:
        out[:, :-1] = p[:-1]
        out[:, -1] = z0 * np.exp(np.sign(v[-1]) * s * t)
        return out
    e = horiz / a
    t0 = np.arctanh(-v[-1] / vn)
    R = z0 * np.cosh(t0)
    u = R * (np.tanh(s * t + t0) - np.tanh(t0))
    out[:, :-1] = p[:-1] + u[:, None] * e
    out[:, -1] = R / np.cosh(s * t + t0)
    return out


def hyperbolic_semicircle(p, v):
    """Centre (on ``z = 0``) and radius of the hyperbolic geodesic through ``p``.

    Returns ``(centre, radius, direction)`` with ``direction`` the horizontal
    unit vector of the vertical plane holding the geodesic, or ``None`` for a
    vertical ray.
    """
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    a = np.linalg.norm(v[:-1])
    if a <= 1e-15 * np.linalg.norm(v):
        return None
    e = v[:-1] / a
    # centre c on the boundary with (p - c) orthogonal to v
    shift = v[-1] * p[-1] / a
    centre = np.concatenate([p[:-1] + shift * e, [0.0]])
    return centre, float(np.linalg.norm(p - centre)), e


def advance_F_geodesics(nd, x, v, length, max_step=2e-3):
    """Move points along Randers geodesics by F-arclength ``length``.

    ``x`` and ``v`` have shape ``(..., d)``; ``v`` is the alpha-geodesic
    velocity (any positive scale). The alpha-geodesic ODE is written in the
    F-arclength parameter, ``x' = v/F(x, v)``, ``v' = -Gamma(v, v)/F(x, v)``,
    and integrated with RK4. Returns the new ``(x, v)``.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if length == 0:
        return x.copy(), v.copy()
    alpha = nd.alpha_metric()
    d = x.shape[-1]

    def rhs(y):
        px, pv = y[..., :d], y[..., d:]
        f = randers_norm(nd, px, pv)[..., None]
        return np.concatenate([pv / f, geodesic_acceleration(alpha, px, pv) / f], axis=-1)

    steps = max(1, int(np.ceil(abs(length) / max_step)))
    h = length / steps
    y = np.concatenate([x, v], axis=-1)
    for _ in range(steps):
        y = _rk4_step(rhs, y, h)
    return y[..., :d], y[..., d:]


def exp_F(nd, p, zeta, t, step=1e-3):
    """Randers exponential map ``exp^F_p(t zeta)`` for an F-unit ``zeta``.

    Follows the alpha-geodesic from ``p`` with initial direction ``zeta``,
    reparameterised so that ``t`` is the F-length travelled.
    """
    p = np.asarray(p, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    f0 = randers_norm(nd, p, zeta)
    if abs(f0 - 1.0) > 1e-10:
        raise ValueError(f"zeta must be F-unit, got F = {f0!r}")
    if t == 0:
        return p.copy()
    x, _ = _advance_checked(nd, p, zeta, t, step)
    return x


def _advance_checked(nd, p, v, t, step):
    bound = nd.alpha_metric().lower_bound() + BOUNDARY_MARGIN
    steps = max(1, int(np.ceil(t / step)))
    h = t / steps
    x, vel = p, v
    for k in range(steps):
        x, vel = advance_F_geodesics(nd, x, vel, h, max_step=h)
        if not x[-1] > bound:
            raise DomainExitError("Randers geodesic left the domain", exit_time=k * h)
    return x, vel


def exp_F_path(nd, p, zeta, t_end, samples=201, step=1e-3):
    """Sampled Randers geodesic with F-arclength parameter on ``[0, t_end]``."""
    p = np.asarray(p, dtype=float)
    ts = np.linspace(0.0, t_end, samples)
    xs = np.empty((samples, p.size))
    vs = np.empty((samples, p.size))
    x, v = p, np.asarray(zeta, dtype=float)
    xs[0], vs[0] = x, v
    for k in range(1, samples):
        x, v = _advance_checked(nd, x, v, ts[k] - ts[k - 1], step)
        xs[k], vs[k] = x, v
    vs = vs / randers_norm(nd, xs, vs)[:, None]
    return GeodesicPath(ts, xs, vs, "F", "unit-F-speed", step)


def randers_spray_geodesic(nd, p, zeta, t_end, step=1e-3, fd_step=1e-5, samples=None):
    """Independent Randers geodesic from the Euler-Lagrange equations of ``F^2/2``.

    With ``L = F^2/2`` the equations read ``g^F_xi xi' = dL/dx - (D_x l) xi``;
    both ``x``-derivatives are central differences. Energy conservation keeps
    ``F(x, x')`` constant, so for an F-unit start the parameter is F-arclength.
    Returns the endpoint, or a :class:`GeodesicPath` when ``samples`` is given.
    """
    p = np.asarray(p, dtype=float)
    d = p.size
    eye = np.eye(d) * fd_step

    def lag(x, xi):
        return 0.5 * randers_norm(nd, x, xi) ** 2

    def rhs(y):
        x, xi = y[:d], y[d:]
        dl_dx = (lag(x + eye, xi) - lag(x - eye, xi)) / (2 * fd_step)
        mixed = (legendre(nd, x + fd_step * xi, xi) - legendre(nd, x - fd_step * xi, xi)) / (2 * fd_step)
        acc = np.linalg.solve(fundamental_tensor(nd, x, xi), dl_dx - mixed)
        return np.concatenate([xi, acc])

    steps = max(1, int(np.ceil(t_end / step)))
    h = t_end / steps
    y = np.concatenate([p, np.asarray(zeta, dtype=float)])
    keep = [] if samples else None
    every = max(1, steps // samples) if samples else 0
    for k in range(steps):
        if keep is not None and k % every == 0:
            keep.append((k * h, y.copy()))
        y = _rk4_step(rhs, y, h)
    if keep is None:
        return y[:d]
    keep.append((t_end, y.copy()))
    ts = np.array([k[0] for k in keep])
    ys = np.array([k[1] for k in keep])
    return GeodesicPath(ts, ys[:, :d], ys[:, d:], "F", "unit-F-speed", h)


def hausdorff(a, b):
    """Symmetric Hausdorff distance between two sampled point sets."""
    from scipy.spatial.distance import directed_hausdorff

    return max(directed_hausdorff(a, b)[0], directed_hausdorff(b, a)[0])


def polyline_hausdorff(a, b):
    """Hausdorff distance between polylines, measured point-to-segment."""

    def one_way(pts, line):
        seg0, seg1 = line[:-1], line[1:]
        dseg = seg1 - seg0
        ll = np.maximum(np.sum(dseg * dseg, axis=1), 1e-300)
        rel = pts[:, None, :] - seg0[None]
        s = np.clip(np.sum(rel * dseg[None], axis=2) / ll, 0.0, 1.0)
        proj = seg0[None] + s[..., None] * dseg[None]
        return float(np.max(np.min(np.linalg.norm(pts[:, None, :] - proj, axis=2), axis=1)))

    return max(one_way(a, b), one_way(b, a))


class CurvatureReport(NamedTuple):
    point: np.ndarray
    plane: tuple
    K_closed_form: float
    K_finite_difference: float


def _closed_form_curvature(m, z, i, j, d):
    a, b = m.coefficients(z)
    da, db, dda = m.derivatives(z)
    top = d - 1
    if top not in (i, j):
        return -da * da / (4 * a * a * b)
    d_ratio = dda / b - da * db / b ** 2
    return (-0.5 * d_ratio - 0.25 * db * da / b ** 2 + 0.25 * da * da / (a * b)) / a


def _fd_christoffel(metric_fn, x, h):
    d = x.size
    g = metric_fn(x)
    dg = np.empty((d, d, d))
    for k in range(d):
        e = np.zeros(d)
        e[k] = h
        dg[k] = (metric_fn(x + e) - metric_fn(x - e)) / (2 * h)
    ginv = np.linalg.inv(g)
    # Gamma^a_bc = 1/2 g^ad (d_b g_dc + d_c g_db - d_d g_bc)
    lower = 0.5 * (np.einsum("bdc->dbc", dg) + np.einsum("cdb->dbc", dg) - dg)
    return np.einsum("ad,dbc->abc", ginv, lower)


def fd_riemann(metric_fn, x, h=1e-4):
    """Riemann tensor ``R^a_bcd`` from central differences of the metric only."""
    x = np.asarray(x, dtype=float)
    d = x.size
    gam = _fd_christoffel(metric_fn, x, h)
    dgam = np.empty((d, d, d, d))  # dgam[c, a, b, e] = d_c Gamma^a_be
    for c in range(d):
        e = np.zeros(d)
        e[c] = h
        dgam[c] = (_fd_christoffel(metric_fn, x + e, h) - _fd_christoffel(metric_fn, x - e, h)) / (2 * h)
    R = (
        np.einsum("cadb->abcd", dgam)
        - np.einsum("dacb->abcd", dgam)
        + np.einsum("ace,edb->abcd", gam, gam)
        - np.einsum("ade,ecb->abcd", gam, gam)
    )
    return R


def fd_sectional_curvature(metric_fn, x, X, Y, h=1e-4):
    """Sectional curvature of span(X, Y) from :func:`fd_riemann`."""
    R = fd_riemann(metric_fn, x, h)
    g = metric_fn(np.asarray(x, dtype=float))
    RXYY = np.einsum("abcd,b,c,d->a", R, Y, X, Y)
    num = X @ g @ RXYY
    den = (X @ g @ X) * (Y @ g @ Y) - (X @ g @ Y) ** 2
    return float(num / den)


def sectional_curvature(m, x, plane, fd_step=1e-4):
    """Sectional curvature of the coordinate plane ``plane = (i, j)`` (0-based).

    The closed form uses the metric coefficients and their derivatives; the
    second value comes from :func:`fd_riemann` applied to the metric matrix.
    """
    x = np.asarray(x, dtype=float)
    d = x.size
    i, j = plane
    if i == j or not (0 <= i < d and 0 <= j < d):
        raise ValueError(f"degenerate coordinate plane {plane!r} in dimension {d}")
    m.check_domain(x)
    closed = float(_closed_form_curvature(m, x[-1], i, j, d))
    X = np.zeros(d)
    Y = np.zeros(d)
    X[i] = 1.0
    Y[j] = 1.0
    fd = fd_sectional_curvature(m.matrix, x, X, Y, fd_step)
    return CurvatureReport(x.copy(), (i, j), closed, fd)


class SphereConvexity(NamedTuple):
    C: float
    II_phiphi: float
    II_betabeta: float


def _sphere_admissible(theta0, phi):
    if not (0.0 < phi < np.pi / 2) or not np.cos(phi) ** 2 > np.cos(theta0) ** 2:
        raise ValueError(f"phi={phi!r} outside the admissible range for theta0={theta0!r}")


def sphere_convexity(theta0, phi):
    """Normal coefficient and coordinate second-derivative pairings on the unit sphere.

    For the sphere ``r(phi, b) = (sin phi cos b, sin phi sin b, cos phi)`` and
    ``V = (-C cos b, -C sin b, -1)`` alpha-orthogonal to it, returns ``C`` and
    ``alpha(r_phiphi, V) = A C sin phi + B cos phi``, ``alpha(r_bb, V) = A C sin phi``.
    These pair plain coordinate second derivatives with ``V``; see
    :func:`sphere_covariant_pairings` for the connection-corrected values.
    """
    _sphere_admissible(theta0, phi)
    z = np.cos(phi)
    ell = z * z - np.cos(theta0) ** 2
    A = 1.0 / ell
    B = z * z / ell ** 2
    C = np.sin(phi) * np.cos(phi) / ell
    return SphereConvexity(float(C), float(A * C * np.sin(phi) + B * z), float(A * C * np.sin(phi)))


def sphere_covariant_pairings(theta0, phi, beta=0.3):
    """``alpha(nabla_{r_a} r_a, V)`` for ``a = phi, beta`` with the alpha connection."""
    _sphere_admissible(theta0, phi)
    m = MetricSpec("alpha", theta0)
    C = sphere_convexity(theta0, phi).C
    sp, cp, sb, cb = np.sin(phi), np.cos(phi), np.sin(beta), np.cos(beta)
    r = np.array([sp * cb, sp * sb, cp])
    r_p = np.array([cp * cb, cp * sb, -sp])
    r_b = np.array([-sp * sb, sp * cb, 0.0])
    r_pp = np.array([-sp * cb, -sp * sb, -cp])
    r_bb = np.array([-sp * cb, -sp * sb, 0.0])
    V = np.array([-C * cb, -C * sb, -1.0])
    gam = christoffel(m, r)
    g = m.diag(r)
    out = []
    for second, first in ((r_pp, r_p), (r_bb, r_b)):
        cov = second + np.einsum("kij,i,j->k", gam, first, first)
        out.append(float(np.sum(g * cov * V)))
    return tuple(out)
