"""Heintze-Karcher and Minkowski functionals, closed-form cap values, sweeps."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
import json
import math
import time
import warnings

import numpy as np
from scipy.integrate import quad

from .surfaces import (
    cap_generator,
    check_hypotheses,
    conformal_field,
    enclosed_integral,
    perturb,
    sphere_measure,
    surface_integral,
)

EQUALITY_TOL = 1e-3

REPORT_SCHEMA = {
    "type": "object",
    "required": [
        "mode", "theta0", "n", "resolution", "lhs", "rhs", "deficit",
        "minkowski_residual", "monotonicity_violation", "convergence", "runtime_ms",
    ],
    "properties": {
        "mode": {"type": "string"},
        "theta0": {"type": "number"},
        "n": {"type": "integer", "minimum": 1},
        "resolution": {"type": "integer", "minimum": 1},
        "lhs": {"type": "number"},
        "rhs": {"type": "number"},
        "deficit": {"type": "number"},
        "minkowski_residual": {"type": "number"},
        "monotonicity_violation": {"type": ["number", "null"]},
        "convergence": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["resolution", "deficit"],
                "properties": {"resolution": {"type": "integer"}, "deficit": {"type": "number"}},
            },
        },
        "runtime_ms": {"type": "integer", "minimum": 0},
    },
}


@dataclass
class HKReport:
    mode: str
    theta0: float
    n: int
    resolution: int
    lhs: float
    rhs: float
    deficit: float
    minkowski_residual: float
    monotonicity_violation: float = None
    runtime_ms: int = 0
    convergence: list = field(default_factory=list)
    equality: bool = False
    config: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def _ms(t0):
    return int(round(1000 * (time.perf_counter() - t0)))


def _ball_lhs(s, c):
    geo = s.geometry
    return surface_integral(s, (s.nodes[:, 1] + c * geo.nu[:, 1]) / geo.H)


def hk_ball(surface, theta0=None, check=True):
    """Heintze-Karcher functional for a surface supported on the unit sphere.

    ``lhs = int_Sigma (x_{n+1} + cos(theta0) <nu, E>) / H`` and
    ``rhs = (n+1)/n int_Omega x_{n+1}``.
    """
    t0 = time.perf_counter()
    theta0 = surface.theta0 if theta0 is None else float(theta0)
    if surface.support != "ball":
        raise ValueError("hk_ball needs a surface supported on the unit sphere")
    if check:
        check_hypotheses(surface, theta0=theta0)
    c = math.cos(theta0)
    lhs = _ball_lhs(surface, c)
    rhs = (surface.n + 1) / surface.n * enclosed_integral(surface, "z")
    res = _minkowski(surface, c)
    deficit = lhs - rhs
    return HKReport("ball", theta0, surface.n, surface.resolution, lhs, rhs, deficit, res,
                    runtime_ms=_ms(t0), equality=abs(deficit) <= EQUALITY_TOL * abs(rhs))


def hk_free_boundary(surface, check=True):
    """Free boundary specialisation: ``int x_{n+1}/H`` against ``(n+1)/n int_Omega x_{n+1}``."""
    t0 = time.perf_counter()
    if check:
        check_hypotheses(surface, theta0=np.pi / 2)
    geo = surface.geometry
    lhs = surface_integral(surface, surface.nodes[:, 1] / geo.H)
    rhs = (surface.n + 1) / surface.n * enclosed_integral(surface, "z")
    res = _minkowski(surface, 0.0)
    return HKReport("free-boundary", np.pi / 2, surface.n, surface.resolution, lhs, rhs, lhs - rhs, res,
                    runtime_ms=_ms(t0), equality=abs(lhs - rhs) <= EQUALITY_TOL * abs(rhs))


def hk_halfspace(surface, theta0=None, check=True):
    """Half-space functional: ``int (1 - cos(theta0) <nu, E>) / H`` against ``(n+1)/n |Omega|``."""
    t0 = time.perf_counter()
    theta0 = surface.theta0 if theta0 is None else float(theta0)
    if surface.support != "halfspace":
        raise ValueError("hk_halfspace needs a surface supported on the plane")
    if check:
        check_hypotheses(surface, theta0=theta0)
    c = math.cos(theta0)
    geo = surface.geometry
    lhs = surface_integral(surface, (1.0 - c * geo.nu[:, 1]) / geo.H)
    rhs = (surface.n + 1) / surface.n * enclosed_integral(surface, "1")
    res = _minkowski(surface, c)
    deficit = lhs - rhs
    return HKReport("halfspace", theta0, surface.n, surface.resolution, lhs, rhs, deficit, res,
                    runtime_ms=_ms(t0), equality=abs(deficit) <= EQUALITY_TOL * abs(rhs))


def _minkowski(s, c):
    geo = s.geometry
    r, z = s.nodes[:, 0], s.nodes[:, 1]
    nu = geo.nu
    if s.support == "halfspace":
        integrand = s.n * (1.0 - c * nu[:, 1]) - geo.H * (r * nu[:, 0] + z * nu[:, 1])
    else:
        X = conformal_field(r, z)
        integrand = s.n * (z + c * nu[:, 1]) - geo.H * np.sum(X * nu, axis=1)
    return surface_integral(s, integrand)


def minkowski_check(surface, theta0=None, angle_tol=1e-6):
    """Residual of the capillary Minkowski formula.

    Ball: ``int n (x_{n+1} + cos(theta0) <nu, E>) - H <X, nu>``; half-space:
    ``int n (1 - cos(theta0) <nu, E>) - H <x, nu>``; closed surfaces use the
    ball form with ``cos(theta0) = 0``. A warning is issued when the measured
    contact angle is not constant, since the formula is only stated for
    constant-angle surfaces.
    """
    theta0 = surface.theta0 if theta0 is None else float(theta0)
    if surface.closed:
        return _minkowski(surface, 0.0)
    ang = surface.geometry.contact_angle
    if len(ang) and np.ptp(ang) > angle_tol:
        warnings.warn("contact angle is not constant; Minkowski formula outside its stated scope",
                      RuntimeWarning, stacklevel=2)
    return _minkowski(surface, math.cos(theta0))


# closed forms (independent one-dimensional quadratures)


def _ball_volume(n, rho):
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1) * rho ** n


def halfspace_cap_exact(theta0, n=2, radius=1.0):
    """``(lhs, rhs)`` of a half-space cap from profile integrals.

    On the cap ``H = n/R``, ``<nu, E> = cos(phi)`` and the enclosed region is
    sliced into horizontal balls.
    """
    R, c = radius, math.cos(theta0)
    lhs = quad(lambda p: (1 - c * math.cos(p)) * (R / n) * sphere_measure(n - 1)
               * (R * math.sin(p)) ** (n - 1) * R, 0.0, theta0, epsabs=1e-14, epsrel=1e-13)[0]
    vol = quad(lambda z: _ball_volume(n, math.sqrt(max(R * R - z * z, 0.0))), R * c, R,
               epsabs=1e-14, epsrel=1e-13)[0]
    return lhs, (n + 1) / n * vol


def ball_cap_exact(theta0, n=2, radius=0.3):
    """``(lhs, rhs)`` of the capillary cap from :func:`cap_generator` by quadrature."""
    R, c = radius, math.cos(theta0)
    d = math.sqrt(1 + R * R + 2 * R * c)
    zb = (1 + d * d - R * R) / (2 * d)
    psi_b = math.acos((d - zb) / R)
    lhs = quad(lambda p: ((d - R * math.cos(p)) - c * math.cos(p)) * (R / n) * sphere_measure(n - 1)
               * (R * math.sin(p)) ** (n - 1) * R, 0.0, psi_b, epsabs=1e-14, epsrel=1e-13)[0]

    def slab(z):
        rho2 = min(1 - z * z, R * R - (z - d) ** 2)
        return z * _ball_volume(n, math.sqrt(max(rho2, 0.0)))

    vol = quad(slab, d - R, zb, epsabs=1e-14, epsrel=1e-13)[0] + quad(slab, zb, 1.0, epsabs=1e-14, epsrel=1e-13)[0]
    return lhs, (n + 1) / n * vol


# sweeps


def observed_orders(resolutions, errors):
    """``log2``-type orders between consecutive refinements."""
    res = np.asarray(resolutions, dtype=float)
    err = np.abs(np.asarray(errors, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(err[:-1] / err[1:]) / np.log(res[1:] / res[:-1])


def convergence_sweep(kind, theta0, n=2, resolutions=(64, 128, 256, 512), radius=None, workers=None):
    """Cap functionals over a refinement sweep.

    ``kind`` is ``"ball"`` or ``"halfspace"``. Returns a list of rows with
    ``resolution, lhs, rhs, deficit, lhs_error, rhs_error, minkowski`` and a
    dict of observed orders. Resolutions are evaluated on a thread pool of
    ``workers`` threads; rows are assembled in input order.
    """
    if kind == "ball":
        mode = "ball-capillary"
        exact = ball_cap_exact(theta0, n, 0.3 if radius is None else radius)
        report = hk_ball
    elif kind == "halfspace":
        mode = "halfspace-capillary"
        exact = halfspace_cap_exact(theta0, n, 1.0 if radius is None else radius)
        report = hk_halfspace
    else:
        raise ValueError("kind must be 'ball' or 'halfspace'")
    def job(N):
        return report(cap_generator(mode, theta0, N, n=n, radius=radius))

    with ThreadPoolExecutor(max_workers=workers) as pool:
        reports = list(pool.map(job, resolutions))
    rows = []
    for N, rep in zip(resolutions, reports):
        rows.append({
            "resolution": int(N), "lhs": rep.lhs, "rhs": rep.rhs, "deficit": rep.deficit,
            "lhs_error": rep.lhs - exact[0], "rhs_error": rep.rhs - exact[1],
            "minkowski": rep.minkowski_residual,
        })
    orders = {
        key: observed_orders(resolutions, [r[key] for r in rows]).tolist()
        for key in ("deficit", "lhs_error", "rhs_error", "minkowski")
    }
    return rows, orders


def default_amplitude(surface, radius):
    """Perturbation amplitude ``min(0.012 R, 0.018 L^2 / R)`` for a cap of radius ``R``.

    ``L`` is the profile length. The bump is spread over the whole profile,
    so its curvature scales like ``amplitude / L^2``; the second term keeps
    that a fixed fraction of ``H ~ n/R`` on short caps.
    """
    L = float(np.sum(np.linalg.norm(np.diff(surface.nodes, axis=0), axis=1)))
    return min(0.012 * radius, 0.018 * L * L / radius)


def perturbed_family(kind, theta0, count=20, n=2, resolution=256, amplitude=None, radius=None, start_seed=0):
    """``count`` admissible perturbed caps; rejected draws are skipped and counted."""
    from .exceptions import HypothesisError

    mode = "ball-capillary" if kind == "ball" else "halfspace-capillary"
    base = cap_generator(mode, theta0, resolution, n=n, radius=radius)
    R = 0.3 if (kind == "ball" and radius is None) else (1.0 if radius is None else radius)
    amp = default_amplitude(base, R) if amplitude is None else amplitude
    out, rejected, seed = [], [], start_seed
    while len(out) < count:
        try:
            out.append((seed, perturb(base, amp, seed=seed)))
        except HypothesisError as exc:
            rejected.append((seed, exc.reason))
        seed += 1
        if seed - start_seed > 20 * count:
            break
    return out, rejected
