"""Batch command-line surface.

Subcommands: jfun (solve/evaluate the delay ODE), moments (moment and
ratio tables), bound (the r_kappa table), identity (exact decomposition
of a concrete instance), search (Omega histograms and counts), params
(parameter echo).  Exit codes: 0 success, 2 validation error, 3
budget/tolerance failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

from . import bounds as bounds_mod
from . import moments as moments_mod
from . import search as search_mod
from . import weights as weights_mod
from .arithmetic import parse_tuple_spec
from .delay_ode import solve_j
from .errors import (
    BudgetExceeded,
    LimitTooLarge,
    QuadratureFailure,
    RangeOverflow,
    SieveKitError,
    ToleranceNotMet,
)

_BUDGET_ERRORS = (BudgetExceeded, ToleranceNotMet, QuadratureFailure,
                  LimitTooLarge, RangeOverflow)


def _write_output(text: str, path: str | None):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _csv_from_rows(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(v):
    return f"{v:.12g}" if isinstance(v, float) else v


def cmd_jfun(args) -> int:
    J = solve_j(args.kappa, args.w_max, tol=args.tol, degree=args.degree,
                cache_dir=args.cache)
    n = args.grid
    rows = []
    for i in range(n + 1):
        w = args.w_max * i / n
        rows.append([_fmt(w), _fmt(J.log_q(w)), _fmt(J.j(w)), _fmt(J.j_prime(w))])
    if args.format == "json":
        payload = {"kappa": args.kappa, "w_max": args.w_max, "tol": args.tol,
                   "degree": J.degree,
                   "grid": [{"w": float(r[0]), "log_q": float(r[1]),
                             "j": float(r[2]), "j_prime": float(r[3])} for r in rows]}
        _write_output(json.dumps(payload, indent=1) + "\n", args.output)
    else:
        _write_output(_csv_from_rows(["w", "log_q", "j", "j_prime"], rows), args.output)
    return 0


def cmd_moments(args) -> int:
    kappas = _parse_range(args.kappa)
    rows = moments_mod.moment_table(kappas, atol=args.atol)
    if args.fixtures:
        return _fixture_io(args.fixtures, "moments.json",
                           {f"{r.kappa}:{r.quantity}": r.value for r in rows},
                           rtol=50 * args.atol)
    if args.format == "json":
        _write_output(json.dumps([r.__dict__ for r in rows], indent=1) + "\n",
                      args.output)
    else:
        _write_output(moments_mod.moments_to_csv(rows), args.output)
    return 0


def cmd_bound(args) -> int:
    kappas = _parse_range(args.kappa)
    rows = bounds_mod.table(kappas, numeric=not args.no_numeric,
                            slack=args.slack, atol=args.atol)
    if args.fixtures:
        return _fixture_io(args.fixtures, "bound.json",
                           {str(r.kappa): r.r_explicit for r in rows}, rtol=0.0)
    if args.format == "json":
        _write_output(bounds_mod.table_to_json(rows) + "\n", args.output)
    else:
        _write_output(bounds_mod.table_to_csv(rows), args.output)
    return 0


def cmd_identity(args) -> int:
    L = parse_tuple_spec(args.tuple)
    u = math.log(args.xi) / math.log(args.zp)
    P = None
    if args.poly:
        coeffs = tuple(float(c) for c in args.poly.split(","))
        P = moments_mod.SievePolynomial(coeffs, u + 1e-9)
    S = weights_mod.build_lambda_system(L, args.xi, args.zp, P=P, exact=args.exact)
    W = weights_mod.RichertWeights(b=args.b, y=args.y, z=args.z)
    inst = weights_mod.SieveInstance(L, args.x)
    dec = weights_mod.decompose(inst, W, S, exact=args.exact)
    payload = {
        "tuple": L.label(), "x": args.x, "z": args.z, "z_prime": args.zp,
        "xi": args.xi, "b": args.b, "y": args.y, "mode": dec.mode,
        "lhs": _num(dec.lhs), "main": _num(dec.main), "error": _num(dec.error),
        "residual": _num(dec.residual),
        "residual_is_zero": dec.residual == 0,
    }
    _write_output(json.dumps(payload, indent=1) + "\n", args.output)
    return 0


def cmd_search(args) -> int:
    L = parse_tuple_spec(args.tuple)
    hist = search_mod.omega_profile(L, args.x, segment_size=args.segment_size,
                                    threads=args.threads)
    if args.r is not None:
        if args.density:
            rep = search_mod.density_report(L, args.x, args.r,
                                            segment_size=args.segment_size,
                                            threads=args.threads)
            _write_output(rep.to_json() + "\n", args.output)
        else:
            _write_output(f"{hist.count_at_most(args.r)}\n", args.output)
        return 0
    if args.format == "json":
        payload = {"tuple": L.label(), "x": args.x, "excluded": hist.excluded,
                   "counts": {str(k): v for k, v in hist.counts.items()}}
        _write_output(json.dumps(payload, indent=1) + "\n", args.output)
    else:
        _write_output(search_mod.histogram_to_csv(hist), args.output)
    return 0


def cmd_params(args) -> int:
    p = bounds_mod.choose_params(args.kappa, args.r, delta=args.delta,
                                 eps=args.eps, alpha=args.alpha)
    _write_output(json.dumps(p.to_json(), indent=1) + "\n", args.output)
    return 0


def _num(v):
    """JSON-safe number: exact rationals go out as strings."""
    return str(v) if not isinstance(v, (int, float)) else v


def _parse_range(spec: str):
    """"100" or "10:101:10" or "10,20,40"."""
    if ":" in spec:
        parts = [int(p) for p in spec.split(":")]
        start, stop = parts[0], parts[1]
        step = parts[2] if len(parts) > 2 else 1
        return list(range(start, stop, step))
    return [int(p) for p in spec.split(",")]


def _fixture_io(dirpath, name, values: dict, rtol: float) -> int:
    """Emit fixtures on first run, check against them afterwards."""
    os.makedirs(dirpath, exist_ok=True)
    path = os.path.join(dirpath, name)
    if not os.path.exists(path):
        with open(path, "w") as fh:
            json.dump(values, fh, indent=1, sort_keys=True)
        sys.stderr.write(f"wrote fixture {path}\n")
        return 0
    with open(path) as fh:
        ref = json.load(fh)
    bad = []
    for key, val in values.items():
        if key not in ref:
            bad.append(f"{key}: missing from fixture")
        elif abs(val - ref[key]) > rtol * max(abs(val), 1.0):
            bad.append(f"{key}: {val} != {ref[key]}")
    for key in ref:
        if key not in values:
            bad.append(f"{key}: not recomputed")
    if bad:
        sys.stderr.write("fixture mismatch:\n" + "\n".join(bad) + "\n")
        return 3
    sys.stderr.write(f"fixture {path} ok\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sievekit",
        description="Weighted-sieve toolkit for almost-prime values of "
                    "products of linear forms.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--output", default="-", help="output path ('-' = stdout)")

    p = sub.add_parser("jfun", help="solve the delay ODE and dump a grid")
    p.add_argument("--kappa", type=int, required=True)
    p.add_argument("--w-max", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--degree", type=int, default=32)
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--cache", default=None, help="JSON cache directory")
    common(p)
    p.set_defaults(func=cmd_jfun)

    p = sub.add_parser("moments", help="moment integral / ratio tables")
    p.add_argument("--kappa", default="10,20,40", help="value, list or lo:hi:step")
    p.add_argument("--atol", type=float, default=1e-8)
    p.add_argument("--fixtures", default=None, help="emit/check fixture directory")
    common(p)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("bound", help="r_kappa bound table")
    p.add_argument("--kappa", default="100", help="value, list or lo:hi:step")
    p.add_argument("--slack", type=float, default=0.0,
                   help="explicit-bound slack coefficient of log(kappa)")
    p.add_argument("--no-numeric", action="store_true")
    p.add_argument("--atol", type=float, default=1e-8)
    p.add_argument("--fixtures", default=None)
    common(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("identity", help="exact decomposition on an instance")
    p.add_argument("--tuple", required=True, help='spec file, JSON or "0,2,6"')
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--z", type=float, required=True)
    p.add_argument("--zp", type=float, required=True)
    p.add_argument("--xi", type=float, required=True)
    p.add_argument("--b", type=float, default=3.0)
    p.add_argument("--y", type=float, default=3.0)
    p.add_argument("--poly", default=None,
                   help="comma-separated ascending coefficients of P")
    p.add_argument("--exact", action="store_true")
    common(p)
    p.set_defaults(func=cmd_identity)

    p = sub.add_parser("search", help="Omega histogram / almost-prime counts")
    p.add_argument("--tuple", required=True)
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--r", type=int, default=None)
    p.add_argument("--density", action="store_true")
    p.add_argument("--segment-size", type=int, default=search_mod.DEFAULT_SEGMENT)
    p.add_argument("--threads", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("params", help="echo the canonical sieve parameters")
    p.add_argument("--kappa", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--alpha", type=float, default=None)
    common(p)
    p.set_defaults(func=cmd_params)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    # jfun default domain: the canonical u
    if args.command == "jfun" and args.w_max is None:
        args.w_max = max(args.kappa - 1.0 / 9.0, 1.0)
    try:
        return args.func(args)
    except _BUDGET_ERRORS as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 3
    except (SieveKitError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
