"""Geodesic normal flows of capillary hypersurfaces and the deficit functional.

Three modes share one driver:

* ``free-boundary-ball``: hyperbolic geodesics, ``d/dt x = -x_{n+1} nu``;
* ``capillary-ball``: Randers geodesics with initial velocity
  ``x_{n+1} n - cos(theta0) E``, ``n = -nu`` the inward normal;
* ``capillary-halfspace``: the parallel map ``x - t (nu - cos(theta0) E)``.

Per node the driver keeps the mean curvature ``H``, the weight ``w`` (the
normal speed), the area ratio ``J`` against ``t = 0`` and an active flag.
Nodes are excised for good once they reach a focal or cut point or leave the
domain. ``Q(t) = sum_active (w/H) dA`` and the swept volume
``V(t) = int_0^t sum_active x_{n+1}^k w dA`` (``k = 1`` in ball modes,
``k = 0`` in the half-space) obey ``Q(0) - Q(t) >= (n+1)/n V(t)``.
"""

import csv
from dataclasses import dataclass, field, replace
import math

import numpy as np
from scipy.spatial import cKDTree

from .exceptions import FlowExhaustedError, HypothesisError
from .geodesics import BOUNDARY_MARGIN, advance_F_geodesics
from .metrics import NavigationData, randers_norm
from .surfaces import (
    _circle_geometry,
    crossing_pairs,
    check_hypotheses,
    contains,
    profile_geometry,
    sphere_measure,
    trapezoid_weights,
    write_surface,
)

FLOW_MODES = ("free-boundary-ball", "capillary-ball", "capillary-halfspace")
MIN_RUN = 5


def _mode_theta0(mode, surface):
    if mode not in FLOW_MODES:
        raise ValueError(f"mode must be one of {FLOW_MODES}")
    want = "halfspace" if mode == "capillary-halfspace" else "ball"
    if surface.support != want:
        raise ValueError(f"mode {mode!r} needs a surface supported on the {want}")
    return np.pi / 2 if mode == "free-boundary-ball" else surface.theta0


def _runs(active):
    """Maximal runs ``(start, stop)`` of consecutive active nodes."""
    idx = np.flatnonzero(np.diff(np.concatenate([[0], active.astype(int), [0]])))
    return list(zip(idx[::2], idx[1::2]))


@dataclass
class FlowState:
    """One time slice of the flow; arrays are indexed by the original nodes."""

    t: float
    mode: str
    n: int
    theta0: float
    x: np.ndarray
    vel: np.ndarray
    active: np.ndarray
    nu: np.ndarray
    H: np.ndarray
    h2: np.ndarray
    w: np.ndarray
    dA: np.ndarray
    J: np.ndarray
    Q: float
    V: float
    P: float
    orientation: float
    template: object = None
    x0: np.ndarray = None
    dir0: np.ndarray = None
    kappa0: np.ndarray = None
    dA0: np.ndarray = None
    excised_at: np.ndarray = None
    info: dict = field(default_factory=dict)

    @property
    def c(self):
        return math.cos(self.theta0)

    @property
    def active_count(self):
        return int(np.count_nonzero(self.active))

    def surface(self):
        """The active part as a surface when it is a single run, else ``None``."""
        runs = _runs(self.active)
        if len(runs) != 1:
            return None
        a, b = runs[0]
        if a != 0 or b != len(self.x):
            return None
        return self.template.with_nodes(self.x)


def _geometry_on_runs(state_like, x, active, n, orientation, curve2d):
    N = len(x)
    nu = np.full((N, 2), np.nan)
    kp = np.full(N, np.nan)
    kr = np.full(N, np.nan)
    dA = np.zeros(N)
    for a, b in _runs(active):
        if b - a < MIN_RUN:
            active[a:b] = False
            continue
        pts = x[a:b]
        try:
            if curve2d:
                nu[a:b], kp[a:b] = _circle_geometry(pts, orientation)
                kr[a:b] = 0.0
                dA[a:b] = trapezoid_weights(pts)
            else:
                nu[a:b], kp[a:b], kr[a:b] = profile_geometry(pts, n, orientation, on_axis=(a == 0))
                dA[a:b] = trapezoid_weights(pts) * sphere_measure(n - 1) * np.abs(pts[:, 0]) ** (n - 1)
        except ValueError:
            active[a:b] = False
    H = kp + (n - 1) * kr
    h2 = kp ** 2 + (n - 1) * kr ** 2
    return nu, H, h2, dA


def _weight(mode, c, x, nu):
    if mode == "capillary-halfspace":
        return 1.0 - c * nu[:, 1]
    return x[:, 1] + c * nu[:, 1]


def _power(mode, x, w, dA, active):
    z = 1.0 if mode == "capillary-halfspace" else x[:, 1]
    return float(np.sum((z * w * dA)[active]))


def init_flow(surface, mode, check=True):
    """Initial :class:`FlowState`; checks the mode hypotheses when ``check``."""
    theta0 = _mode_theta0(mode, surface)
    if check:
        check_hypotheses(surface, theta0=theta0)
    if surface.closed:
        raise ValueError("flows need a surface with boundary")
    geo = surface.geometry
    x = surface.nodes.copy()
    c = math.cos(theta0)
    nu = geo.nu.copy()
    w = _weight(mode, c, x, nu)
    if mode == "capillary-halfspace":
        vel = -nu + [0.0, c]
    else:
        vel = -x[:, 1:2] * nu - [0.0, c]
    if surface.n >= 2:
        vel[x[:, 0] == 0, 0] = 0.0
    active = np.ones(len(x), dtype=bool)
    H = geo.H.copy()
    Q = float(np.sum(w / H * geo.dA))
    d0 = np.gradient(x, axis=0)
    return FlowState(
        t=0.0, mode=mode, n=surface.n, theta0=theta0, x=x, vel=vel, active=active, nu=nu, H=H,
        h2=geo.h2.copy(), w=w, dA=geo.dA.copy(), J=np.ones(len(x)), Q=Q, V=0.0,
        P=_power(mode, x, w, geo.dA, active), orientation=surface.orientation, template=surface,
        x0=x.copy(), dir0=d0, kappa0=np.stack([geo.kappa_profile, geo.kappa_rotation], axis=1),
        dA0=geo.dA.copy(), excised_at=np.full(len(x), np.nan),
    )


def _advance_positions(state, dt, substep):
    """New positions and geodesic velocities of active nodes plus a domain mask."""
    act = state.active
    x, vel = state.x.copy(), state.vel.copy()
    ok = np.ones(len(x), dtype=bool)
    if state.mode == "capillary-halfspace":
        x[act] = state.x0[act] + (state.t + dt) * state.vel[act]
        ok &= ~act | (x[:, 1] >= -1e-12)
        return x, vel, ok
    nd = NavigationData.ball(state.theta0, 2)
    xa, va = advance_F_geodesics(nd, state.x[act], state.vel[act], dt, max_step=substep)
    x[act], vel[act] = xa, va
    if state.n >= 2:
        # axis nodes stay on the axis by symmetry; remove roundoff drift
        on_axis = state.x0[:, 0] == 0
        x[on_axis, 0] = 0.0
        vel[on_axis, 0] = 0.0
    bound = abs(state.c) + BOUNDARY_MARGIN
    ok &= ~act | ((x[:, 1] > bound) & np.all(np.isfinite(x), axis=1))
    return x, vel, ok


def _stretch_flipped(state, x, active):
    """Nodes whose local frame has turned inside out (a focal point was crossed)."""
    bad = np.zeros(len(x), dtype=bool)
    idx = np.flatnonzero(active)
    if len(idx) < 2:
        return bad
    seg = x[idx[1:]] - x[idx[:-1]]
    seg0 = state.x0[idx[1:]] - state.x0[idx[:-1]]
    flip = np.sum(seg * seg0, axis=1) <= 0
    bad[idx[1:][flip]] = True
    bad[idx[:-1][flip]] = True
    if state.n >= 2:
        # the rotational direction degenerates when a node reaches the axis
        bad |= active & (x[:, 0] <= 0) & (state.x0[:, 0] > 0)
    return bad


def _intersections(x, active):
    """Active nodes on crossing segments (cut points of the front)."""
    bad = np.zeros(len(x), dtype=bool)
    for a, b in _runs(active):
        if b - a >= 4:
            pairs = crossing_pairs(x[a:b])
            for k in (0, 1):
                bad[a + pairs[:, k]] = True
                bad[a + pairs[:, k] + 1] = True
    return bad


def flow_step(state, dt, substep=2e-3):
    """Advance the flow by ``dt`` and excise focal, cut and exited nodes."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if state.active_count == 0:
        raise FlowExhaustedError("all nodes have been excised")
    x, vel, ok = _advance_positions(state, dt, min(substep, dt))
    t = state.t + dt
    active = state.active & ok
    if state.mode == "capillary-halfspace":
        k = state.kappa0
        J_exact = (1 - t * k[:, 0]) * (1 - t * k[:, 1]) ** (state.n - 1)
        active &= J_exact > 0
    active &= ~_stretch_flipped(state, x, active)
    active &= ~_intersections(x, active)
    curve2d = state.n == 1
    nu, H, h2, dA = _geometry_on_runs(state, x, active, state.n, state.orientation, curve2d)
    for _ in range(len(x)):
        bad = active & ~(np.isfinite(H) & (H > 0))
        if not bad.any():
            break
        active &= ~bad
        nu, H, h2, dA = _geometry_on_runs(state, x, active, state.n, state.orientation, curve2d)
    w = _weight(state.mode, state.c, x, nu)
    inactive = ~active
    for arr in (nu, H, h2, w):
        arr[inactive] = np.nan
    dA = np.where(active, dA, 0.0)
    # J from the area-element law: d log J / dt = -x_{n+1}^k H along the nodes
    zk_old = 1.0 if state.mode == "capillary-halfspace" else state.x[:, 1]
    zk_new = 1.0 if state.mode == "capillary-halfspace" else x[:, 1]
    J = state.J * np.exp(-0.5 * dt * (zk_old * state.H + zk_new * H))
    if state.mode == "capillary-halfspace":
        J = np.where(active, J_exact, np.nan)
    P = _power(state.mode, x, w, dA, active)
    V = state.V + 0.5 * dt * (state.P + P)
    Q = float(np.sum((w / H * dA)[active]))
    excised = state.excised_at.copy()
    newly = state.active & ~active
    excised[newly] = t
    return replace(
        state, t=t, x=x, vel=vel, active=active, nu=nu, H=H, h2=h2, w=w, dA=dA, J=J,
        Q=Q, V=V, P=P, excised_at=excised, info={"dt": dt, "excised": int(newly.sum())},
    )


@dataclass
class EvolutionReport:
    """Residuals of the evolution equations over one step at surviving nodes."""

    t: float
    dt: float
    H_residual: np.ndarray
    w_residual: np.ndarray
    J_residual: np.ndarray
    inequality_residual: np.ndarray
    umbilic_gap: np.ndarray
    speed_residual: np.ndarray
    decomposition_residual: float
    weight_min: float
    state: FlowState = None


def _evolution_rhs(state):
    """Material derivatives of ``H``, ``w`` and ``w/H`` predicted by the flow."""
    n_in = -state.nu
    if state.mode == "capillary-halfspace":
        dH = state.h2
        dw = np.zeros_like(state.w)
        z = 1.0
    else:
        z = state.x[:, 1]
        dH = state.H * n_in[:, 1] + state.h2 * z
        dw = state.w * n_in[:, 1]
    dq = -state.w * state.h2 * z / state.H ** 2
    bound = -z * state.w / state.n
    return dH, dw, dq, bound


def track_evolution(state, dt):
    """Take one step and compare geometric changes with the evolution equations.

    ``H_residual`` and ``w_residual`` are finite-difference rates minus the
    trapezoid average of the predicted rates. ``inequality_residual`` is
    ``d/dt (w/H) + x_{n+1}^k w / n``, which must be ``<= 0`` and vanishes on
    umbilic surfaces; ``umbilic_gap`` is ``|h|^2 - H^2/n`` (its sign check).
    ``speed_residual`` compares the node velocity with ``x_{n+1} n - v0``
    from the current geometry.
    """
    new = flow_step(state, dt)
    keep = new.active
    dH0, dw0, dq0, b0 = _evolution_rhs(state)
    dH1, dw1, dq1, b1 = _evolution_rhs(new)
    H_res = (new.H - state.H) / dt - 0.5 * (dH0 + dH1)
    w_res = (new.w - state.w) / dt - 0.5 * (dw0 + dw1)
    q_rate = (new.w / new.H - state.w / state.H) / dt
    ineq = q_rate - 0.5 * (b0 + b1)
    geo_J = np.where(keep, new.dA / np.where(state.dA0 > 0, state.dA0, np.nan), np.nan)
    J_res = np.log(geo_J) - np.log(new.J)
    # velocity of the current front versus the normal-flow formula
    speed = np.full(len(state.x), np.nan)
    c = state.c
    if state.mode == "capillary-halfspace":
        predicted = -state.nu + [0.0, c]
        actual = state.vel
    else:
        nd = NavigationData.ball(state.theta0, 2)
        act = state.active
        actual = np.full_like(state.x, np.nan)
        actual[act] = state.vel[act] / randers_norm(nd, state.x[act], state.vel[act])[:, None]
        predicted = -state.x[:, 1:2] * state.nu - [0.0, c]
    speed = np.linalg.norm(actual - predicted, axis=1)
    # algebraic split of the velocity into f n plus the tangential part of -v0 (or +cE)
    n_in = -state.nu
    v0 = np.array([0.0, c])
    v0_n = np.sum(n_in * v0, axis=1, keepdims=True)
    tang = v0 - v0_n * n_in
    if state.mode == "capillary-halfspace":
        split = state.w[:, None] * n_in + tang
        full = n_in + v0
    else:
        split = (state.x[:, 1:2] - v0_n) * n_in - tang
        full = state.x[:, 1:2] * n_in - v0
    decomposition = np.nanmax(np.abs(split - full))
    mask = ~keep
    for arr in (H_res, w_res, ineq, J_res):
        arr[mask] = np.nan
    gap = state.h2 - state.H ** 2 / state.n
    return EvolutionReport(
        t=state.t, dt=dt, H_residual=H_res, w_residual=w_res, J_residual=J_res,
        inequality_residual=ineq, umbilic_gap=gap, speed_residual=speed,
        decomposition_residual=float(decomposition), weight_min=float(np.nanmin(new.w)), state=new,
    )


@dataclass
class FlowHistory:
    """Samples of ``t, Q, V`` and the active count along one run."""

    mode: str
    n: int
    t: np.ndarray
    Q: np.ndarray
    V: np.ndarray
    active: np.ndarray
    final: FlowState
    h: float
    dt: float
    area: float
    focal_time: float
    positions: list = None
    spacing: list = None

    @property
    def monotone_quantity(self):
        return self.Q + (self.n + 1) / self.n * self.V

    @property
    def tolerance(self):
        return 5.0 * (self.h ** 2 + self.dt ** 2) * self.area

    def monotonicity_violation(self):
        """Largest increase of ``Q + (n+1)/n V`` between consecutive samples."""
        m = self.monotone_quantity
        return float(max(0.0, np.max(np.diff(m)))) if len(m) > 1 else 0.0

    def equality_residual(self):
        """``max_t |Q(0) - Q(t) - (n+1)/n V(t)|``."""
        return float(np.max(np.abs(self.Q[0] - self.Q - (self.n + 1) / self.n * self.V)))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "Q", "V", "active"])
            for row in zip(self.t, self.Q, self.V, self.active):
                w.writerow([repr(float(row[0])), repr(float(row[1])), repr(float(row[2])), int(row[3])])


def _spacing(x, active):
    seg = np.linalg.norm(np.diff(x, axis=0), axis=1)
    both = active[1:] & active[:-1]
    seg = np.where(both, seg, 0.0)
    out = np.zeros(len(x))
    out[:-1] = seg
    out[1:] = np.maximum(out[1:], seg)
    return out


def run_flow(surface, mode, dt=None, t_max=np.inf, check=True, keep_positions=False,
             snapshot_dir=None, max_steps=100000):
    """Run the flow until ``t_max`` or exhaustion.

    The step is ``min(dt, 0.25 / (max H * max w), h)``, never below
    ``dt / 64``; ``h`` is the largest initial node spacing. Returns a
    :class:`FlowHistory`.
    """
    state = init_flow(surface, mode, check=check)
    seg = np.linalg.norm(np.diff(surface.nodes, axis=0), axis=1)
    h = float(np.max(seg))
    dt = h if dt is None else float(dt)
    if not dt > 0:
        raise ValueError("dt must be positive")
    floor = dt / 64
    area = float(np.sum(state.dA))
    ts, Qs, Vs, counts = [0.0], [state.Q], [0.0], [state.active_count]
    positions = [(state.x.copy(), state.active.copy())] if keep_positions else None
    focal = np.nan
    steps = 0
    while state.t < t_max and state.active_count > 0 and steps < max_steps:
        act = state.active
        cap = 0.25 / (np.max(state.H[act]) * max(np.max(np.abs(state.w[act])), 1e-300))
        step = max(min(dt, cap, h), floor)
        step = min(step, t_max - state.t)
        state = flow_step(state, step)
        steps += 1
        if state.info["excised"] and np.isnan(focal):
            focal = state.t
        ts.append(state.t)
        Qs.append(state.Q)
        Vs.append(state.V)
        counts.append(state.active_count)
        if keep_positions:
            positions.append((state.x.copy(), state.active.copy()))
        if snapshot_dir is not None:
            snap = state.surface()
            if snap is not None:
                write_surface(snap, f"{snapshot_dir}/step_{steps:05d}.txt")
    return FlowHistory(mode, surface.n, np.array(ts), np.array(Qs), np.array(Vs), np.array(counts),
                       state, h, dt, area, focal, positions)


def _sample_omega(surface, count, rng):
    """Uniform samples of Omega in ambient coordinates by rejection."""
    d = surface.n + 1
    poly = surface.closing_polygon()
    rmax = float(np.max(np.abs(poly[:, 0])))
    zmin = max(float(np.min(poly[:, 1])), 0.0)
    lo = np.r_[-rmax * np.ones(d - 1), zmin]
    hi = np.r_[rmax * np.ones(d - 1), float(np.max(poly[:, 1]))]
    out = []
    total = 0
    while total < count:
        cand = rng.uniform(lo, hi, size=(4 * count, d))
        cand = cand[contains(surface, cand)]
        out.append(cand)
        total += len(cand)
        if total == 0 and len(out) > 20:
            raise HypothesisError("domain", "degenerate enclosed region")
    return np.concatenate(out)[:count]


def coverage_check(surface, mode, samples=10000, dt=None, seed=0, t_max=np.inf):
    """Fraction of uniform samples of Omega passed by the swept family.

    A sample counts as covered when it lies within the local resolution
    radius of a swept node: the diagonal of the cell spanned by the node's
    neighbour spacing and its displacement over one step.
    """
    hist = run_flow(surface, mode, dt=dt, t_max=t_max, keep_positions=True)
    rng = np.random.default_rng(seed)
    pts = _sample_omega(surface, samples, rng)
    if surface.n >= 2:
        q = np.stack([np.linalg.norm(pts[:, :-1], axis=1), pts[:, -1]], axis=1)
    else:
        q = pts
    nodes, radii = [], []
    frames = hist.positions
    for k, (x, act) in enumerate(frames):
        sp = _spacing(x, act)
        if k + 1 < len(frames):
            x1, act1 = frames[k + 1]
            disp = np.where(act1, np.linalg.norm(x1 - x, axis=1), 0.0)
        else:
            disp = np.zeros(len(x))
        if k > 0:
            x_1, _ = frames[k - 1]
            disp = np.maximum(disp, np.where(act, np.linalg.norm(x - x_1, axis=1), 0.0))
        nodes.append(x[act])
        radii.append(np.hypot(sp, disp)[act])
    nodes = np.concatenate(nodes)
    radii = np.concatenate(radii)
    if surface.n >= 2:
        # mirrored copies so samples near the axis see both sides
        nodes = np.concatenate([nodes, nodes * [-1.0, 1.0]])
        radii = np.concatenate([radii, radii])
    tree = cKDTree(nodes)
    rmax = float(np.max(radii))
    hits = tree.query_ball_point(q, rmax)
    covered = np.zeros(len(q), dtype=bool)
    for i, cand in enumerate(hits):
        if cand:
            cand = np.asarray(cand)
            covered[i] = np.any(np.linalg.norm(nodes[cand] - q[i], axis=1) <= radii[cand])
    return float(np.mean(covered))
