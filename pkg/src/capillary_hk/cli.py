"""Command-line entry point: ``python3 -m capillary_hk <subcommand> ...``.

Exit codes: 0 when every check passes, 1 when a check fails, 2 for invalid
input (bad flags, unreadable or invalid surface files, failed hypotheses).
"""

import argparse
import csv
import io
import json
import math
import sys
import time

import numpy as np

from .exceptions import DomainExitError, HypothesisError
from .flows import FLOW_MODES, run_flow
from .geodesics import exp_F_path, integrate_alpha_geodesic, sectional_curvature
from .metrics import MetricSpec, NavigationData, randers_norm
from .surfaces import cap_generator, perturb, read_surface
from .verify import EQUALITY_TOL, default_amplitude, hk_ball, hk_halfspace

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


class InvalidInput(Exception):
    pass


def _surface_spec(text):
    if text in ("cap", "perturbed") or text.startswith("file:"):
        return text
    raise argparse.ArgumentTypeError("expected cap, perturbed or file:<path>")


def _common(p, theta0=math.pi / 3, resolution=256):
    p.add_argument("--theta0", type=float, default=theta0, help="contact angle in radians")
    p.add_argument("--n", type=int, default=2, help="hypersurface dimension")
    p.add_argument("--resolution", type=int, default=resolution, help="profile segments")
    p.add_argument("--dt", type=float, default=None, help="flow step (default: node spacing)")
    p.add_argument("--surface", type=_surface_spec, default="cap", help="cap | perturbed | file:<path>")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--radius", type=float, default=None, help="cap radius")
    p.add_argument("--amplitude", type=float, default=None, help="perturbation amplitude")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser():
    parser = argparse.ArgumentParser(prog="capillary_hk", description="Capillary Heintze-Karcher checks")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("verify-ball", "verify-halfspace"):
        p = sub.add_parser(name, help=f"{name.split('-')[1]} inequality report")
        _common(p)
        p.add_argument("--no-flow", action="store_true", help="skip the monotonicity flow")
    p = sub.add_parser("flow", help="run a geodesic normal flow and print Q, V history")
    _common(p)
    p.add_argument("--mode", choices=FLOW_MODES, default="capillary-ball")
    p.add_argument("--t-max", type=float, default=math.inf)
    p = sub.add_parser("geodesic", help="sample a Randers geodesic")
    p.add_argument("--theta0", type=float, default=math.pi / 3)
    p.add_argument("--point", type=float, nargs="+", default=[0.0, 1.0])
    p.add_argument("--direction", type=float, nargs="+", default=[1.0, 0.0])
    p.add_argument("--length", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=101)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p = sub.add_parser("curvature", help="coordinate-plane sectional curvatures")
    p.add_argument("--theta0", type=float, default=math.pi / 3)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--samples", type=int, default=5, help="heights sampled")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p = sub.add_parser("convergence", help="refinement sweep on generated caps")
    p.add_argument("--kind", choices=("ball", "halfspace"), default="halfspace")
    p.add_argument("--theta0", type=float, default=math.pi / 3)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--resolutions", type=int, nargs="+", default=[64, 128, 256, 512])
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    return parser


def _emit(args, payload, rows=None):
    if args.format == "csv":
        buf = io.StringIO()
        rows = rows if rows is not None else [payload]
        keys = list(rows[0].keys()) if rows else []
        w = csv.DictWriter(buf, fieldnames=keys)
        w.writeheader()
        for r in rows:
            w.writerow({k: (json.dumps(v) if isinstance(v, (list, dict)) else v) for k, v in r.items()})
        text = buf.getvalue()
    else:
        text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _build_surface(args, kind, resolution=None):
    resolution = args.resolution if resolution is None else resolution
    if args.surface.startswith("file:"):
        return read_surface(args.surface[5:])
    if args.n < 1 or resolution < 4:
        raise InvalidInput("need n >= 1 and resolution >= 4")
    mode = "halfspace-capillary" if kind == "halfspace" else "ball-capillary"
    s = cap_generator(mode, args.theta0, resolution, n=args.n, radius=args.radius)
    if args.surface == "perturbed":
        R = args.radius if args.radius is not None else (1.0 if kind == "halfspace" else 0.3)
        amp = default_amplitude(s, R) if args.amplitude is None else args.amplitude
        s = perturb(s, amp, seed=args.seed)
    return s


def _verify(args, kind):
    t0 = time.perf_counter()
    s = _build_surface(args, kind)
    report_fn = hk_ball if kind == "ball" else hk_halfspace
    rep = report_fn(s, args.theta0)
    failures = []
    if not args.no_flow:
        mode = "capillary-halfspace" if kind == "halfspace" else "capillary-ball"
        hist = run_flow(s, mode, dt=args.dt, check=False)
        rep.monotonicity_violation = hist.monotonicity_violation()
        if rep.monotonicity_violation > hist.tolerance:
            failures.append("monotonicity")
    generated = not args.surface.startswith("file:")
    if generated:
        for N in (args.resolution // 8, args.resolution // 4, args.resolution // 2):
            if N >= 32:
                rep.convergence.append({"resolution": N, "deficit": report_fn(_build_surface(args, kind, N), args.theta0).deficit})
        rep.convergence.append({"resolution": rep.resolution, "deficit": rep.deficit})
    tol = EQUALITY_TOL * abs(rep.rhs)
    if rep.deficit < -tol:
        failures.append("deficit")
    if args.surface == "cap" and abs(rep.deficit) > tol:
        failures.append("equality")
    rep.runtime_ms = int(round(1000 * (time.perf_counter() - t0)))
    rep.config = {k: v for k, v in vars(args).items() if k != "func"}
    rep.config["failures"] = failures
    payload = rep.to_dict()
    _emit(args, payload, [{k: v for k, v in payload.items() if k != "config"}])
    return EXIT_FAIL if failures else EXIT_OK


def cmd_flow(args):
    kind = "halfspace" if args.mode == "capillary-halfspace" else "ball"
    if args.mode == "free-boundary-ball":
        args.theta0 = math.pi / 2
    s = _build_surface(args, kind)
    hist = run_flow(s, args.mode, dt=args.dt, t_max=args.t_max)
    viol = hist.monotonicity_violation()
    rows = [{"t": float(t), "Q": float(q), "V": float(v), "active": int(a)}
            for t, q, v, a in zip(hist.t, hist.Q, hist.V, hist.active)]
    payload = {
        "mode": args.mode, "theta0": args.theta0, "n": s.n, "resolution": s.resolution,
        "monotonicity_violation": viol, "tolerance": hist.tolerance,
        "equality_residual": hist.equality_residual(), "focal_time": hist.focal_time, "history": rows,
    }
    _emit(args, payload, rows)
    return EXIT_OK if viol <= hist.tolerance else EXIT_FAIL


def cmd_geodesic(args):
    p = np.asarray(args.point, dtype=float)
    v = np.asarray(args.direction, dtype=float)
    if p.shape != v.shape or p.size < 2:
        raise InvalidInput("--point and --direction need the same dimension >= 2")
    nd = NavigationData.ball(args.theta0, p.size)
    zeta = v / randers_norm(nd, p, v)
    path = exp_F_path(nd, p, zeta, args.length, samples=args.samples)
    alpha = integrate_alpha_geodesic(nd.alpha_metric(), p, zeta, 1.0, step=1e-3)
    rows = [{"t": float(t), **{f"x{i + 1}": float(c) for i, c in enumerate(x)}} for t, x in zip(path.t, path.x)]
    payload = {"theta0": args.theta0, "speed_drift": alpha.info["speed_drift"], "path": rows}
    _emit(args, payload, rows)
    return EXIT_OK


def cmd_curvature(args):
    if args.n < 1 or args.samples < 1:
        raise InvalidInput("need n >= 1 and samples >= 1")
    m = MetricSpec("alpha", args.theta0)
    d = args.n + 1
    base = abs(math.cos(args.theta0))
    rows = []
    for z in base + np.linspace(0.05, 1.0, args.samples):
        x = np.zeros(d)
        x[-1] = z
        planes = [(i, j) for i in range(d) for j in range(i + 1, d)]
        for plane in planes:
            rep = sectional_curvature(m, x, plane)
            rows.append({"point": x.tolist(), "plane": [plane[0] + 1, plane[1] + 1],
                         "K_closed": rep.K_closed_form, "K_fd": rep.K_finite_difference})
    ok = all(r["K_closed"] < 0 and r["K_fd"] < 0 for r in rows)
    _emit(args, {"theta0": args.theta0, "all_negative": ok, "table": rows}, rows)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_convergence(args):
    from .verify import convergence_sweep

    if len(args.resolutions) < 2 or min(args.resolutions) < 4:
        raise InvalidInput("need at least two resolutions >= 4")
    rows, orders = convergence_sweep(args.kind, args.theta0, args.n, args.resolutions, args.radius)
    ok = all(o >= 1.9 for o in orders["rhs_error"]) and all(o >= 1.9 for o in orders["lhs_error"])
    _emit(args, {"kind": args.kind, "theta0": args.theta0, "n": args.n, "rows": rows, "orders": orders,
                 "passed": ok}, rows)
    return EXIT_OK if ok else EXIT_FAIL


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    handlers = {
        "verify-ball": lambda a: _verify(a, "ball"),
        "verify-halfspace": lambda a: _verify(a, "halfspace"),
        "flow": cmd_flow,
        "geodesic": cmd_geodesic,
        "curvature": cmd_curvature,
        "convergence": cmd_convergence,
    }
    try:
        return handlers[args.command](args)
    except HypothesisError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (InvalidInput, ValueError, OSError, DomainExitError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
