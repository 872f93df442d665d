"""Discrete hypersurfaces with boundary on a support, their geometry and integrals.

A surface is stored as an ordered list of points in a meridian half-plane
(axisymmetric mode, ``n >= 2``) or in the plane (``curve2d``, ``n = 1``).
The second coordinate is always the height ``x_{n+1}``.

Supports are the unit sphere (``"ball"``), the plane ``x_{n+1} = 0``
(``"halfspace"``) or nothing (``"none"``, closed surfaces). The stored normal
``nu`` points out of the enclosed region Omega; the inward normal used by the
flows is ``-nu``.
"""

from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from .exceptions import HypothesisError

SUPPORTS = ("ball", "halfspace", "none")
CAP_MODES = ("ball-free-boundary", "ball-capillary", "halfspace-capillary")
SUPPORT_TOL = 1e-10
ANGLE_TOL = 1e-6


def sphere_measure(k):
    """Area of the unit ``k``-sphere, ``|S^k| = 2 pi^((k+1)/2) / Gamma((k+1)/2)``."""
    return 2.0 * math.pi ** ((k + 1) / 2) / math.gamma((k + 1) / 2)


def _rot_cw(t):
    return np.stack([t[..., 1], -t[..., 0]], axis=-1)


def _chord_param(pts, periodic=False):
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    if np.any(seg <= 0):
        raise ValueError("duplicate nodes")
    return np.concatenate([[0.0], np.cumsum(seg)])


def _spline_frame(pts, orientation, periodic=False):
    """Unit normal and normal curvature at the knots of a chord-length spline."""
    s = _chord_param(pts)
    cs = CubicSpline(s, pts, bc_type="periodic" if periodic else "not-a-knot")
    d1 = cs(s, 1)
    d2 = cs(s, 2)
    speed = np.linalg.norm(d1, axis=1)
    nu = orientation * _rot_cw(d1 / speed[:, None])
    kappa = -np.sum(d2 * nu, axis=1) / speed ** 2
    return nu, kappa


def _circle_through(a, b, c):
    """Centre and radius of circles through triples of points (inf when collinear)."""
    ba, ca = b - a, c - a
    det = 2.0 * (ba[..., 0] * ca[..., 1] - ba[..., 1] * ca[..., 0])
    nb, nc = np.sum(ba * ba, axis=-1), np.sum(ca * ca, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ux = (ca[..., 1] * nb - ba[..., 1] * nc) / det
        uz = (ba[..., 0] * nc - ca[..., 0] * nb) / det
    centre = a + np.stack([ux, uz], axis=-1)
    radius = np.hypot(ux, uz)
    return centre, radius, np.abs(det) <= 1e-14 * np.maximum(nb, nc)


def _circle_normal(a, b, c, at, orientation):
    """Normal and curvature at ``at`` of the circle through ``a, b, c``."""
    centre, radius, flat = _circle_through(a, b, c)
    chord = orientation * _rot_cw((c - a) / np.linalg.norm(c - a, axis=-1, keepdims=True))
    with np.errstate(invalid="ignore", divide="ignore"):
        u = (at - centre) / radius[..., None]
        sgn = np.sign(np.sum(u * chord, axis=-1))
        nu = np.where(flat[..., None], chord, sgn[..., None] * u)
        kappa = np.where(flat, 0.0, sgn / radius)
    return nu, kappa


def _circle_geometry(pts, orientation, periodic=False):
    """Three-point circumcircle normals and curvatures along a plane polyline."""
    if periodic:
        a, c = np.roll(pts, 1, axis=0), np.roll(pts, -1, axis=0)
        return _circle_normal(a, pts, c, pts, orientation)
    nu, kappa = np.empty_like(pts), np.empty(len(pts))
    nu[1:-1], kappa[1:-1] = _circle_normal(pts[:-2], pts[1:-1], pts[2:], pts[1:-1], orientation)
    nu[0], kappa[0] = _circle_normal(pts[0], pts[1], pts[2], pts[0], orientation)
    nu[-1], kappa[-1] = _circle_normal(pts[-3], pts[-2], pts[-1], pts[-1], orientation)
    return nu, kappa


def profile_geometry(pts, n, orientation, on_axis=False, closed=False):
    """Normals and curvatures of an axisymmetric profile piece.

    ``on_axis`` marks a profile that starts on the rotation axis (it is
    mirrored before spline fitting so the axis is an interior point);
    ``closed`` marks a profile running from axis to axis.
    Returns ``(nu, kappa_profile, kappa_rotation)``.
    """
    pts = np.asarray(pts, dtype=float)
    m = len(pts)
    if on_axis:
        if closed:
            full = np.concatenate([pts, pts[-2:0:-1] * [-1.0, 1.0], pts[:1]])
            nu, kp = _spline_frame(full, orientation, periodic=True)
            nu, kp = nu[:m], kp[:m]
        else:
            mirror = pts[:0:-1] * [-1.0, 1.0]
            nu, kp = _spline_frame(np.concatenate([mirror, pts]), orientation)
            nu, kp = nu[m - 1:], kp[m - 1:]
    else:
        nu, kp = _spline_frame(pts, orientation)
    r = pts[:, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        kr = np.where(r > 0, nu[:, 0] / r, kp)
    return nu, kp, kr


def trapezoid_weights(pts, closed=False):
    """Chord-length trapezoid weights of the nodes of a polyline."""
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    w = np.zeros(len(pts))
    w[:-1] += 0.5 * seg
    w[1:] += 0.5 * seg
    if closed:
        tail = np.linalg.norm(pts[0] - pts[-1])
        w[0] += 0.5 * tail
        w[-1] += 0.5 * tail
    return w


def crossing_pairs(p):
    """Index pairs ``(i, j)``, ``j > i + 1``, of crossing segments of a polyline.

    Candidate pairs come from a sweep over x-sorted bounding boxes, so the
    cost is close to linear for curves without many overlapping boxes.
    """
    a0, a1 = p[:-1], p[1:]
    lo, hi = np.minimum(a0, a1), np.maximum(a0, a1)
    order = np.argsort(lo[:, 0], kind="stable")
    xs = lo[order, 0]
    stop = np.searchsorted(xs, hi[order, 0], side="right")
    start = np.arange(1, len(order) + 1)
    counts = np.maximum(stop - start, 0)
    if not counts.sum():
        return np.empty((0, 2), dtype=int)
    first = np.repeat(np.arange(len(order)), counts)
    offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    i, j = order[first], order[start[first] + offs]
    i, j = np.minimum(i, j), np.maximum(i, j)
    keep = (j > i + 1) & np.all(lo[i] <= hi[j], axis=1) & np.all(lo[j] <= hi[i], axis=1)
    i, j = i[keep], j[keep]
    d, e = a1[i] - a0[i], a1[j] - a0[j]
    rel = a0[j] - a0[i]

    def cross(u, v):
        return u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]

    den = cross(d, e)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = cross(rel, e) / den
        u = cross(rel, d) / den
    hit = (den != 0) & (t > 1e-12) & (t < 1 - 1e-12) & (u > 1e-12) & (u < 1 - 1e-12)
    return np.stack([i[hit], j[hit]], axis=1)


def _segments_intersect(p):
    """True when two non-adjacent segments of the polyline ``p`` cross."""
    return len(crossing_pairs(p)) > 0


@dataclass(frozen=True)
class SurfaceGeometry:
    """Per-node extrinsic data; ``contact_angle`` is aligned with ``boundary``."""

    nu: np.ndarray
    H: np.ndarray
    dA: np.ndarray
    kappa_profile: np.ndarray
    kappa_rotation: np.ndarray
    h2: np.ndarray
    boundary: np.ndarray
    contact_angle: np.ndarray


@dataclass(frozen=True, eq=False)
class DiscreteHypersurface:
    """Polyline (``n = 1``) or axisymmetric profile (``n >= 2``) hypersurface.

    ``nodes`` is an ``(N, 2)`` array. In axisymmetric mode the first
    coordinate is the distance to the axis and the first node sits on the
    axis; the last node is the support node, or also on the axis when
    ``closed``. In ``curve2d`` mode an open curve has a support node at each
    end.
    """

    nodes: np.ndarray
    n: int
    support: str = "ball"
    theta0: float = np.pi / 2
    closed: bool = False

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise ValueError(f"nodes must have shape (N, 2), got {nodes.shape}")
        if len(nodes) < 4:
            raise ValueError("need at least 4 nodes")
        if not np.all(np.isfinite(nodes)):
            raise ValueError("non-finite node coordinates")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if self.support not in SUPPORTS:
            raise ValueError(f"support must be one of {SUPPORTS}")
        if self.closed != (self.support == "none"):
            raise ValueError("closed surfaces have no support and open ones need one")
        if self.n >= 2:
            if nodes[0, 0] != 0.0 or (self.closed and nodes[-1, 0] != 0.0):
                raise ValueError("axisymmetric profiles must start (and if closed, end) on the axis")
            if np.any(nodes[:, 0] < 0):
                raise HypothesisError("embeddedness", "profile crosses the rotation axis")
        if self.closed and self.n == 1 and np.array_equal(nodes[0], nodes[-1]):
            nodes = nodes[:-1]
        if np.any(np.linalg.norm(np.diff(nodes, axis=0), axis=1) == 0):
            raise ValueError("duplicate nodes")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "theta0", float(self.theta0))

    @property
    def mode(self):
        return "curve2d" if self.n == 1 else "axisymmetric"

    @property
    def resolution(self):
        return len(self.nodes) - 1

    @property
    def boundary_nodes(self):
        if self.closed:
            return np.array([], dtype=int)
        if self.n == 1:
            return np.array([0, len(self.nodes) - 1])
        return np.array([len(self.nodes) - 1])

    def meridian_curve(self):
        """The full curve in the meridian plane (profile mirrored across the axis)."""
        if self.n == 1:
            return self.nodes.copy()
        mirror = self.nodes[:0:-1] * [-1.0, 1.0]
        if self.closed:
            return np.concatenate([self.nodes, mirror[1:]])
        return np.concatenate([mirror, self.nodes])

    def closing_polygon(self, arc_samples=400):
        """Boundary of the enclosed region in the meridian plane, node order kept."""
        full = self.meridian_curve()
        if self.closed:
            return full
        end, start = full[-1], full[0]
        if self.support == "halfspace":
            return full
        a_end = math.atan2(end[0], end[1])
        a_start = math.atan2(start[0], start[1])
        ang = np.linspace(a_end, a_start, arc_samples)[1:-1]
        return np.concatenate([full, np.stack([np.sin(ang), np.cos(ang)], axis=1)])

    @cached_property
    def orientation(self):
        """+1 when the stored node order runs counter-clockwise around Omega."""
        poly = self.closing_polygon()
        x, z = poly[:, 0], poly[:, 1]
        area = 0.5 * np.sum(x * np.roll(z, -1) - np.roll(x, -1) * z)
        if area == 0:
            raise ValueError("degenerate enclosed region")
        return 1.0 if area > 0 else -1.0

    @cached_property
    def geometry(self):
        return compute_geometry(self)

    def with_nodes(self, nodes):
        return DiscreteHypersurface(nodes, self.n, self.support, self.theta0, self.closed)

    def full_coordinates(self):
        """Heights and horizontal radii ``(r, z)`` used by the integrands."""
        return self.nodes[:, 0], self.nodes[:, 1]


def _contact_angles(s, nu_bdry, idx):
    pts = s.nodes[idx]
    if s.support == "ball":
        nbar = pts / np.linalg.norm(pts, axis=1, keepdims=True)
    else:
        nbar = np.tile([0.0, -1.0], (len(idx), 1))
    return np.arccos(np.clip(-np.sum(nu_bdry * nbar, axis=1), -1.0, 1.0))


def compute_geometry(s):
    """Normals, mean curvature, area elements and contact angles of ``s``.

    Axisymmetric profiles use chord-length cubic splines (the profile is
    mirrored across the axis first); plane curves use three-point
    circumcircles. Contact angles always use the circle through the last
    three nodes, which is exact on round caps.
    """
    pts = s.nodes
    o = s.orientation
    if s.n == 1:
        nu, kp = _circle_geometry(pts, o, periodic=s.closed)
        kr = np.zeros_like(kp)
        dA = trapezoid_weights(pts, closed=s.closed)
        H = kp
        h2 = kp ** 2
    else:
        nu, kp, kr = profile_geometry(pts, s.n, o, on_axis=True, closed=s.closed)
        dA = trapezoid_weights(pts) * sphere_measure(s.n - 1) * pts[:, 0] ** (s.n - 1)
        H = kp + (s.n - 1) * kr
        h2 = kp ** 2 + (s.n - 1) * kr ** 2
    idx = s.boundary_nodes
    if len(idx):
        bn = []
        for i in idx:
            j = np.array([i - 2, i - 1, i]) if i > 0 else np.array([0, 1, 2])
            bn.append(_circle_normal(pts[j[0]], pts[j[1]], pts[j[2]], pts[i], o)[0])
        angles = _contact_angles(s, np.array(bn), idx)
    else:
        angles = np.array([])
    return SurfaceGeometry(nu, H, dA, kp, kr, h2, idx, angles)


def geometry(s):
    """Extrinsic geometry of a :class:`DiscreteHypersurface` (cached)."""
    return s.geometry


def surface_integral(s, f):
    """Quadrature ``sum_nodes f dA`` for per-node values or a callable ``f(s, geo)``."""
    geo = s.geometry
    vals = f(s, geo) if callable(f) else np.asarray(f, dtype=float)
    return float(np.sum(vals * geo.dA))


def conformal_field(r, z):
    """Meridian components of ``X = x_{n+1} x - (|x|^2 + 1)/2 E_{n+1}``."""
    return np.stack([z * r, z * z - 0.5 * (r * r + z * z + 1.0)], axis=-1)


def _support_area(s):
    """Area of the part of the unit sphere that bounds Omega."""
    end = s.nodes[-1]
    if s.n == 1:
        start = s.nodes[0]
        return abs(math.atan2(end[0], end[1]) - math.atan2(start[0], start[1]))
    phi_b = math.atan2(end[0], end[1])
    val, _ = quad(lambda p: math.sin(p) ** (s.n - 1), 0.0, phi_b, epsabs=1e-15, epsrel=1e-14)
    return sphere_measure(s.n - 1) * val


def enclosed_integral(s, weight="1"):
    """``int_Omega weight`` by the divergence theorem over the boundary of Omega.

    ``weight`` is ``"1"`` or ``"z"`` (the height ``x_{n+1}``). Fields are
    chosen so that the support contributes either nothing or a closed-form
    amount: ``x/(n+1)`` and the conformal Killing field ``X/(n+1)`` for the
    sphere, ``x/(n+1)`` and ``z^2/2 E`` for the plane.
    """
    if weight not in ("1", "z"):
        raise ValueError("weight must be '1' or 'z'")
    geo = s.geometry
    r, z = s.full_coordinates()
    nu = geo.nu
    m = s.n + 1
    if weight == "1":
        flux = surface_integral(s, (r * nu[:, 0] + z * nu[:, 1]) / m)
        if s.support == "ball":
            flux += _support_area(s) / m
        return flux
    if s.support == "halfspace":
        return surface_integral(s, 0.5 * z * z * nu[:, 1])
    X = conformal_field(r, z)
    return surface_integral(s, np.sum(X * nu, axis=1) / m)


def conformal_divergence_residual(points):
    """``div X - (n+1) x_{n+1}`` at points ``(..., n+1)``, expanded analytically.

    ``X_i = z x_i`` for horizontal ``i`` and ``X_z = z^2 - (|x|^2+1)/2``;
    each horizontal term contributes ``z``, the vertical one ``2z - z``.
    """
    x = np.asarray(points, dtype=float)
    z = x[..., -1]
    d = x.shape[-1]
    div = (d - 1) * z + (2 * z - z)
    return div - d * z


# generators


def _validate_cap(nodes, support, theta0):
    z = nodes[:, 1]
    if support == "ball":
        bound = abs(math.cos(theta0))
        low = int(np.argmin(z))
        if not z[low] > bound:
            raise HypothesisError("domain", f"cap reaches height {z[low]:.6g} <= |cos theta0| = {bound:.6g}")
    elif np.min(z) < -SUPPORT_TOL:
        raise HypothesisError("domain", f"cap reaches height {np.min(z):.6g} < 0")


def cap_generator(mode, theta0, resolution=256, n=2, radius=None):
    """Spherical cap meeting the support at constant angle ``theta0``.

    ``halfspace-capillary``: sphere of radius ``radius`` (default 1) centred at
    height ``-radius cos theta0``. ``ball-capillary`` / ``ball-free-boundary``:
    sphere of radius ``radius`` (default 0.3) centred on the axis at height
    ``d = sqrt(1 + R^2 + 2R cos theta0)``, cut by the unit ball. ``resolution``
    is the number of segments of the profile (of the whole arc when ``n = 1``).
    """
    if mode not in CAP_MODES:
        raise ValueError(f"mode must be one of {CAP_MODES}")
    if mode == "ball-free-boundary":
        theta0 = np.pi / 2
    if not 0 < theta0 < np.pi:
        raise ValueError("theta0 must lie in (0, pi)")
    if resolution < 3:
        raise ValueError("resolution must be at least 3")
    c = math.cos(theta0)
    if mode == "halfspace-capillary":
        R = 1.0 if radius is None else float(radius)
        lo = -theta0 if n == 1 else 0.0
        phi = np.linspace(lo, theta0, resolution + 1)
        nodes = np.stack([R * np.sin(phi), R * (np.cos(phi) - c)], axis=1)
        nodes[-1, 1] = 0.0
        if n == 1:
            nodes[0, 1] = 0.0
        else:
            nodes[0, 0] = 0.0
        support = "halfspace"
    else:
        R = 0.3 if radius is None else float(radius)
        d = math.sqrt(1.0 + R * R + 2.0 * R * c)
        zb = (1.0 + d * d - R * R) / (2.0 * d)
        psi_b = math.acos(np.clip((d - zb) / R, -1.0, 1.0))
        lo = -psi_b if n == 1 else 0.0
        psi = np.linspace(lo, psi_b, resolution + 1)
        nodes = np.stack([R * np.sin(psi), d - R * np.cos(psi)], axis=1)
        # put the support nodes exactly on the sphere
        rb = math.sqrt(max(1.0 - zb * zb, 0.0))
        nodes[-1] = [rb, zb]
        if n == 1:
            nodes[0] = [-rb, zb]
        else:
            nodes[0, 0] = 0.0
        support = "ball"
    _validate_cap(nodes, support, theta0)
    return DiscreteHypersurface(nodes, n, support, theta0)


def sphere_surface(radius, centre_height, resolution=256, n=2):
    """Closed round sphere centred on the axis (no support)."""
    phi = np.linspace(0.0, np.pi, resolution + 1)
    if n == 1:
        phi = phi * 2.0
        phi = phi[:-1]
    nodes = np.stack([radius * np.sin(phi), centre_height + radius * np.cos(phi)], axis=1)
    if n >= 2:
        nodes[0, 0] = nodes[-1, 0] = 0.0
    return DiscreteHypersurface(nodes, n, "none", np.pi / 2, closed=True)


def spheroid_cap(a, b, depth, theta0=np.pi / 2, resolution=256, n=2):
    """Half-space cap cut from the spheroid ``r^2/a^2 + (z + depth)^2/b^2 = 1``."""
    if not 0 <= depth < b:
        raise ValueError("need 0 <= depth < b")
    phi_b = math.acos(depth / b)
    lo = -phi_b if n == 1 else 0.0
    phi = np.linspace(lo, phi_b, resolution + 1)
    nodes = np.stack([a * np.sin(phi), b * np.cos(phi) - depth], axis=1)
    nodes[-1, 1] = 0.0
    if n == 1:
        nodes[0, 1] = 0.0
    else:
        nodes[0, 0] = 0.0
    return DiscreteHypersurface(nodes, n, "halfspace", theta0)


# hypotheses


def check_support(s, tol=SUPPORT_TOL):
    idx = s.boundary_nodes
    if not len(idx):
        return
    pts = s.nodes[idx]
    if s.support == "ball":
        err = np.abs(np.linalg.norm(pts, axis=1) - 1.0)
    else:
        err = np.abs(pts[:, 1])
    if np.max(err) > tol:
        raise HypothesisError("support", f"boundary node off the support by {np.max(err):.3e}")


def check_domain(s):
    z = s.nodes[:, 1]
    if s.support == "ball":
        bound = abs(math.cos(s.theta0))
        if not np.min(z) > bound:
            raise HypothesisError("domain", f"node at height {np.min(z):.6g} <= |cos theta0| = {bound:.6g}")
        radius = np.max(np.linalg.norm(s.nodes, axis=1))
        if radius > 1.0 + SUPPORT_TOL:
            raise HypothesisError("domain", f"node outside the unit ball (|x| = {radius:.6g})")
    elif s.support == "halfspace" and np.min(z) < -SUPPORT_TOL:
        raise HypothesisError("domain", f"node below the plane at height {np.min(z):.6g}")


def check_embedded(s):
    if _segments_intersect(s.meridian_curve()):
        raise HypothesisError("embeddedness", "curve segments intersect")


def check_hypotheses(s, theta0=None, require=("support", "domain", "embeddedness", "mean-convexity", "angle")):
    """Raise :class:`HypothesisError` naming the first failed hypothesis.

    ``angle`` asks for ``theta(x) <= theta0`` at every boundary node (up to
    :data:`ANGLE_TOL`); ``mean-convexity`` for ``H > 0`` at every node.
    """
    theta0 = s.theta0 if theta0 is None else theta0
    if "support" in require:
        check_support(s)
    if "domain" in require:
        check_domain(s)
    if "embeddedness" in require:
        check_embedded(s)
    geo = s.geometry
    if "mean-convexity" in require and not np.all(geo.H > 0):
        k = int(np.argmin(geo.H))
        raise HypothesisError("mean-convexity", f"H = {geo.H[k]:.3e} at node {k}")
    if "angle" in require and len(geo.contact_angle):
        worst = float(np.max(geo.contact_angle))
        if worst > theta0 + ANGLE_TOL:
            raise HypothesisError("angle", f"contact angle {worst:.9f} exceeds theta0 = {theta0:.9f}")


def _envelope(u, reach=0.85):
    """Smooth even bump equal to 1 at 0 and vanishing for ``|u| >= reach``."""
    q = np.clip(np.abs(u) / reach, 0.0, 1.0)
    out = np.zeros_like(q)
    inside = q < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - q[inside] ** 2))
    return out


def perturb(s, amplitude, frequency=3, seed=0, check=True):
    """Move nodes along their normals by a smooth random bump.

    The bump is a random combination of ``frequency`` cosine modes in
    arclength. On open surfaces it is multiplied by a smooth envelope that
    vanishes identically on the last 15% of arclength before each support
    node, so boundary positions and measured contact angles are kept exactly.
    Raises :class:`HypothesisError` when the result violates a hypothesis.
    """
    if amplitude == 0:
        return s.with_nodes(s.nodes)
    rng = np.random.default_rng(seed)
    coef = rng.normal(size=frequency)
    phase = rng.uniform(0, 2 * np.pi, size=frequency)
    seg = np.linalg.norm(np.diff(s.nodes, axis=0), axis=1)
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    k = np.arange(1, frequency + 1)
    if s.closed and s.n == 1:
        u = arc / (arc[-1] + np.linalg.norm(s.nodes[0] - s.nodes[-1]))
        bump = np.cos(2 * np.pi * np.outer(u, k) + phase) @ coef
    elif s.closed:
        u = arc / arc[-1]
        bump = np.cos(np.pi * np.outer(u, k)) @ coef
    elif s.n == 1:
        u = 2 * arc / arc[-1] - 1
        bump = np.cos(np.pi * np.outer(u, k) / 2 + phase) @ coef * _envelope(u)
    else:
        u = arc / arc[-1]
        bump = np.cos(np.pi * np.outer(u, k)) @ coef * _envelope(u)
    bump /= np.max(np.abs(bump))
    for i in s.boundary_nodes:
        # contact angles are read from the circle through the three end nodes
        stencil = bump[i:i + 3] if i == 0 else bump[i - 2:i + 1]
        if np.any(stencil != 0):
            raise ValueError("resolution too coarse to perturb without moving the boundary stencil")
    nodes = s.nodes + amplitude * bump[:, None] * s.geometry.nu
    if s.n >= 2:
        nodes[0, 0] = 0.0
        if s.closed:
            nodes[-1, 0] = 0.0
    for i in s.boundary_nodes:
        nodes[i] = s.nodes[i]
    try:
        out = s.with_nodes(nodes)
    except HypothesisError:
        raise
    except ValueError as exc:
        raise HypothesisError("embeddedness", str(exc)) from exc
    if check:
        check_hypotheses(out)
    return out


# containment


def contains(s, points):
    """Even-odd test of ambient points ``(..., n+1)`` against Omega."""
    pts = np.asarray(points, dtype=float)
    if s.n == 1:
        q = pts
    else:
        q = np.stack([np.linalg.norm(pts[..., :-1], axis=-1), pts[..., -1]], axis=-1)
    poly = s.closing_polygon(arc_samples=4 * len(s.nodes))
    x0, z0 = poly[:, 0], poly[:, 1]
    x1, z1 = np.roll(x0, -1), np.roll(z0, -1)
    qx, qz = q[..., 0][..., None], q[..., 1][..., None]
    crosses = (z0 > qz) != (z1 > qz)
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = x0 + (qz - z0) * (x1 - x0) / (z1 - z0)
    inside = np.count_nonzero(crosses & (qx < xi), axis=-1) % 2 == 1
    if s.support == "halfspace":
        inside &= q[..., 1] > 0
    return inside


# file format


def write_surface(s, path):
    """Header ``mode n theta0 node_count``, two comment lines, then the nodes."""
    with open(path, "w") as fh:
        fh.write(f"{s.mode} {s.n} {float(s.theta0)!r} {len(s.nodes)}\n")
        fh.write(f"# support {s.support}\n")
        fh.write(f"# closed {int(s.closed)}\n")
        for a, b in s.nodes:
            fh.write(f"{float(a)!r} {float(b)!r}\n")


def read_surface(path, check=("support", "domain", "embeddedness")):
    """Parse a surface file and validate its invariants.

    Raises ``ValueError`` for format problems and :class:`HypothesisError`
    (named) for invariant violations.
    """
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise HypothesisError("format", "empty surface file")
    head = lines[0].split()
    if len(head) != 4:
        raise HypothesisError("format", "header must read 'mode n theta0 node_count'")
    try:
        mode, n, theta0, count = head[0], int(head[1]), float(head[2]), int(head[3])
    except ValueError as exc:
        raise HypothesisError("format", f"bad header: {exc}") from exc
    if mode != ("curve2d" if n == 1 else "axisymmetric"):
        raise HypothesisError("format", f"mode {mode!r} does not match n = {n}")
    meta = {"support": "ball", "closed": "0"}
    rows = []
    for ln in lines[1:]:
        if ln.startswith("#"):
            parts = ln[1:].split()
            if len(parts) == 2:
                meta[parts[0]] = parts[1]
            continue
        rows.append(ln.split())
    try:
        nodes = np.array(rows, dtype=float)
    except ValueError as exc:
        raise HypothesisError("format", f"bad node line: {exc}") from exc
    if nodes.shape != (count, 2):
        raise HypothesisError("format", f"expected {count} nodes of 2 coordinates, got {nodes.shape}")
    try:
        s = DiscreteHypersurface(nodes, n, meta["support"], theta0, meta["closed"] == "1")
    except HypothesisError:
        raise
    except ValueError as exc:
        raise HypothesisError("format", str(exc)) from exc
    if check:
        check_hypotheses(s, require=check)
    return s
