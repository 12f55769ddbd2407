"""Command-line entry point.

Every subcommand writes JSON lines to stdout.  Each record carries the tool
version and a hash of the run configuration (``--jobs`` excluded, since it
does not change results).  Usage errors exit with status 2; numerical
failures print a JSON error record and exit with status 1.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import __version__
from ._bisect import BracketError
from .acceptance import CHECKS, run_check
from .asymptotics import (
    default_jobs,
    eigenvector_residual,
    first_ratio_probe,
    parallel_map,
    sine_profile,
    sweep,
)
from .potentials import FAMILIES, check_hypotheses, dyadic_grid, parse_potential, zoo
from .radial_nd import (
    EIGSH_SEED,
    AngularFactor,
    RadialGrid,
    StarGrid,
    radial_eigensolve,
    star_dirichlet_reference_2d,
    star_domain_eigensolve_2d,
)
from .spectral1d import GridSpec, TruncationError, eigensolve
from .svgplot import loglog_svg
from .wellwidth import NonMonotoneError, solve_delta_pm, solve_even_delta, solve_radial_delta

NUMERICAL_ERRORS = (BracketError, NonMonotoneError, TruncationError, ValueError,
                    RuntimeError, ArithmeticError)


class UsageError(Exception):
    pass


# -- argument types -------------------------------------------------------------


def _positive(text):
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def _h_grid(text):
    """``START:STOP:COUNT`` (geometric, inclusive) or a comma list of values."""
    try:
        if ":" in text:
            a, b, n = text.split(":")
            a, b, n = float(a), float(b), int(n)
            if n < 2 or a <= 0 or b <= 0:
                raise ValueError
            return [float(v) for v in np.geomspace(a, b, n)]
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad h grid {text!r}") from None
    if any(not v > 0 for v in vals):
        raise argparse.ArgumentTypeError("h values must be positive")
    return vals


def _potential(text):
    try:
        return parse_potential(text)
    except (ValueError, KeyError, OSError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _theta(text):
    try:
        if os.path.isfile(text):
            with open(text, encoding="utf-8") as fh:
                text = fh.read()
        return AngularFactor(tuple(json.loads(text)))
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"bad theta table: {exc}") from None


# -- output -----------------------------------------------------------------------


class Emitter:
    def __init__(self, args, stream=None):
        self.stream = stream or sys.stdout
        cfg = {k: v for k, v in vars(args).items() if k not in ("jobs", "func")}
        blob = json.dumps(cfg, sort_keys=True, default=_jsonable)
        self.config_hash = hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]

    def __call__(self, record):
        out = {"tool_version": __version__, "config_hash": self.config_hash, **record}
        self.stream.write(json.dumps(out, default=_jsonable) + "\n")


def _jsonable(obj):
    if hasattr(obj, "to_json"):
        return obj.to_json()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (set, tuple)):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _write_svg(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _grid(args):
    box = tuple(args.box) if getattr(args, "box", None) else None
    return GridSpec(n_points=args.n, box=box, richardson=not args.no_richardson)


# -- subcommands --------------------------------------------------------------------


def cmd_delta(args, emit):
    p = args.potential
    for h in args.h:
        if args.radial:
            emit({"h": h, "delta": solve_radial_delta(p, h)})
            continue
        w = solve_even_delta(p, h) if p.even else solve_delta_pm(p, h)
        emit(w.to_json())
    return 0


def cmd_solve(args, emit):
    s = eigensolve(args.potential, args.h, args.k, _grid(args), want_vectors=args.vectors,
                   strict=not args.lenient)
    emit({"potential": args.potential.to_json(), **s.to_json(vectors=args.vectors)})
    if args.csv:
        _write_csv(args.csv, ["k", "lambda_P", "lambda_Q", "error"],
                   [(i + 1, a, b, c) for i, (a, b, c) in
                    enumerate(zip(s.eigenvalues, s.q_eigenvalues, s.error_estimates))])
    return 0


def cmd_sweep(args, emit):
    r = sweep(args.potential, args.h_grid, args.k, _grid(args), vectors=args.vectors,
              jobs=args.jobs, fit_tail=args.fit_tail)
    for rec in r.records:
        emit(rec.to_json())
    emit({"summary": True, "converging": r.converging(),
          "fitted_remainder": r.fitted_remainder})
    if args.csv:
        rows = []
        for rec in r.records:
            for k in range(args.k):
                rows.append((rec.h, k + 1, rec.lambda_numeric[k], rec.lambda_predicted[k],
                             rec.ratio[k], rec.error_estimates[k]))
        _write_csv(args.csv, ["h", "k", "lambda", "predicted", "ratio", "error"], rows)
    if args.svg:
        series = {f"|ratio_{k} - 1|": (list(r.h_grid), list(r.deviations(k)))
                  for k in range(1, args.k + 1)}
        _write_svg(args.svg, loglog_svg(series, title=f"{args.potential.family} sweep",
                                        ylabel="|ratio - 1|"))
    return 0


def cmd_verify(args, emit):
    wanted = args.only or sorted(CHECKS)
    unknown = [c for c in wanted if c not in CHECKS]
    if unknown:
        raise UsageError(f"unknown criteria {unknown}")
    results = parallel_map(run_check, [(c,) for c in wanted], args.jobs)
    failed = []
    for rec in results:
        emit(rec)
        if not rec["passed"]:
            failed.append(rec["criterion"])
    emit({"summary": True, "passed": len(results) - len(failed), "failed": failed})
    return 1 if failed else 0


def cmd_profile(args, emit):
    s = eigensolve(args.potential, args.h, args.k, _grid(args), want_vectors=True)
    for k in range(1, args.k + 1):
        emit({"h": args.h, "k": k, "lambda": float(s.eigenvalues[k - 1]),
              "eigvec_residual": eigenvector_residual(s, k)})
    if args.csv:
        cols = [s.grid]
        header = ["x"]
        for k in range(1, args.k + 1):
            cols += [s.eigenvectors[k - 1], sine_profile(s.widths, k, s.grid, s.weights)]
            header += [f"u{k}", f"v{k}"]
        _write_csv(args.csv, header, zip(*cols))
    return 0


def cmd_radial(args, emit):
    grid = RadialGrid(n_cells=args.n, richardson=not args.no_richardson)
    for h in args.h:
        s = radial_eigensolve(args.potential, h, args.dim, args.k, grid)
        emit({"potential": args.potential.to_json(), "dimension": args.dim,
              "multiplicities": list(s.multiplicities), **s.to_json()})
    return 0


def cmd_star2d(args, emit):
    theta = args.theta
    if args.ellipse:
        theta = AngularFactor.ellipse(*args.ellipse)
    if theta is None:
        raise UsageError("star2d needs --theta or --ellipse")
    grid = StarGrid(n=args.n, richardson=not args.no_richardson)
    if args.reference:
        ref = star_dirichlet_reference_2d(theta, grid, args.k, seed=args.seed)
        emit({"reference": "dirichlet_star", "eigenvalues": list(ref.eigenvalues),
              "error_estimates": list(ref.error_estimates)})
    for h in args.h:
        s = star_domain_eigensolve_2d(args.potential, theta, h, args.k, grid,
                                      separable=args.separable, seed=args.seed)
        emit({"potential": args.potential.to_json(), **s.to_json()})
    return 0


def cmd_probe(args, emit):
    hs = sorted(args.h_grid, reverse=True)
    r = first_ratio_probe(args.potential, hs, _grid(args), jobs=args.jobs)
    emit({"potential": args.potential.to_json(), **r.to_json()})
    if args.svg:
        _write_svg(args.svg, loglog_svg({"lambda_1 / h^2": (list(r.h_grid), list(r.ratios))},
                                        title="first-eigenvalue probe", ylabel="lambda_1/h^2"))
    return 0


def cmd_zoo(args, emit):
    grid = dyadic_grid(args.grid_size)
    for name, p in zoo().items():
        rec = {"name": name, **p.to_json(), "description": FAMILIES[p.family].source,
               "point_well": p.point_well, "even": p.even, "monotone": p.monotone}
        if p.point_well:
            rep = check_hypotheses(p, args.n_max, grid)
            rec["flat_on_grid"] = rep.flat_ok
            rec["monotone_on_grid"] = rep.monotonicity_ok
        emit(rec)
    return 0


# -- parser -------------------------------------------------------------------------


def _add_grid(sp, n_default=4096):
    sp.add_argument("--n", type=int, default=n_default, help="grid points (default %(default)s)")
    sp.add_argument("--no-richardson", action="store_true", help="skip the refined solve")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="degenwell",
        description="Spectra of -h^2 Delta + V for degenerate potential wells.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--jobs", type=int, default=None,
                        help="worker processes (default: all cores; DEGENWELL_JOBS overrides)")
    common.add_argument("--seed", type=int, default=EIGSH_SEED,
                        help="start-vector seed for sparse eigensolves")
    sub = parser.add_subparsers(dest="command", required=True)
    _sub = sub.add_parser

    def add(name, **kw):
        return _sub(name, parents=[common], **kw)

    sub.add_parser = add
    pot = dict(type=_potential, required=True,
               help="zoo name, inline JSON {family, params} or a JSON file")

    sp = sub.add_parser("delta", help="well widths over a grid of h")
    sp.add_argument("--potential", **pot)
    sp.add_argument("--h", type=_positive, nargs="+", required=True)
    sp.add_argument("--radial", action="store_true", help="solve delta^2 V0(delta) = h^2")
    sp.set_defaults(func=cmd_delta)

    sp = sub.add_parser("solve", help="lowest eigenpairs at one h")
    sp.add_argument("--potential", **pot)
    sp.add_argument("--h", type=_positive, required=True)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--box", type=float, nargs=2, metavar=("LEFT", "RIGHT"))
    sp.add_argument("--vectors", action="store_true")
    sp.add_argument("--lenient", action="store_true",
                    help="flag weakly confined levels instead of failing")
    sp.add_argument("--csv")
    _add_grid(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("sweep", help="compare with pi^2 k^2 h^2 / w^2 over an h grid")
    sp.add_argument("--potential", **pot)
    sp.add_argument("--h-grid", type=_h_grid, required=True, help="START:STOP:COUNT or list")
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--vectors", action="store_true", help="also compute profile residuals")
    sp.add_argument("--fit-tail", type=int, default=None)
    sp.add_argument("--csv")
    sp.add_argument("--svg")
    _add_grid(sp)
    sp.set_defaults(func=cmd_sweep, box=None)

    sp = sub.add_parser("verify", help="run the acceptance checks")
    sp.add_argument("--only", type=int, nargs="+", help="criterion numbers")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("profile", help="eigenvectors against sine profiles")
    sp.add_argument("--potential", **pot)
    sp.add_argument("--h", type=_positive, required=True)
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--csv", help="write x, u_k, v_k columns")
    _add_grid(sp)
    sp.set_defaults(func=cmd_profile, box=None)

    sp = sub.add_parser("radial", help="radial wells in d dimensions")
    sp.add_argument("--potential", **pot)
    sp.add_argument("--h", type=_positive, nargs="+", required=True)
    sp.add_argument("--dim", type=int, default=3)
    sp.add_argument("--k", type=int, default=1)
    _add_grid(sp)
    sp.set_defaults(func=cmd_radial)

    sp = sub.add_parser("star2d", help="wells V0(|x| theta(x/|x|)) in the plane")
    sp.add_argument("--potential", **pot)
    sp.add_argument("--h", type=_positive, nargs="+", required=True)
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--theta", type=_theta, help="JSON array tabulated on 2 pi j / n")
    sp.add_argument("--ellipse", type=_positive, nargs=2, metavar=("A", "B"))
    sp.add_argument("--separable", action="store_true", help="use V0(|x|) theta instead")
    sp.add_argument("--reference", action="store_true", help="also emit the masked reference")
    _add_grid(sp, n_default=160)
    sp.set_defaults(func=cmd_star2d)

    sp = sub.add_parser("probe-null", help="growth of lambda_1 / h^2 as h decreases")
    sp.add_argument("--potential", **pot)
    sp.add_argument("--h-grid", type=_h_grid, required=True)
    sp.add_argument("--svg")
    _add_grid(sp)
    sp.set_defaults(func=cmd_probe, box=None)

    sp = sub.add_parser("zoo", help="list the built-in potentials")
    sp.add_argument("--n-max", type=int, default=20)
    sp.add_argument("--grid-size", type=int, default=1000)
    sp.set_defaults(func=cmd_zoo)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    env = os.environ.get("DEGENWELL_JOBS")
    try:
        args.jobs = int(env) if env else (args.jobs or default_jobs())
    except ValueError:
        parser.error(f"DEGENWELL_JOBS must be an integer, got {env!r}")
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    emit = Emitter(args)
    try:
        return args.func(args, emit)
    except UsageError as exc:
        parser.error(str(exc))
    except NUMERICAL_ERRORS as exc:
        emit({"error": type(exc).__name__, "message": str(exc), "command": args.command})
        return 1


if __name__ == "__main__":
    sys.exit(main())
