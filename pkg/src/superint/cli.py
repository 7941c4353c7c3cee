"""Command-line front end.

Subcommands: verify, casimir, curvature, revolution, linear, tables,
trajectory, dump-catalog.  Exit status 0 when every executed identity
passes at its tolerance, 1 on verification failure, 2 on configuration
errors, 3 on sampling/domain failures.  Reports are JSON (default),
human-readable lines, or CSV where tabular.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import catalog, geometry
from .dynamics import clamp_energy, drift_report, integrate, trajectory_csv
from .errors import DomainError, SamplingError, StepFailure
from .jets import PhasePoint
from .poisson import (DEFAULT_SEED, TOL_BRACKET, TOL_NESTED, verify_algebra,
                      verify_casimir)
from .systems import CLASS_TAGS, SystemSpec, spec_from_dict, spec_to_dict

_SPEC_FLAGS = ["kappa", "lambda", "mu", "nu", "k", "ell", "m", "n"]


def _add_spec_args(p):
    p.add_argument("--class", dest="cls", choices=CLASS_TAGS,
                   help="system class tag")
    for name in _SPEC_FLAGS:
        p.add_argument(f"--{name}", dest=f"p_{name}", type=float, default=0.0,
                       help=f"parameter {name} (default 0)")
    p.add_argument("--spec-file", help="JSON file with the flat spec document")


def _add_common(p, points=100):
    p.add_argument("--points", type=int, default=points)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--output", help="write the report to this path")
    p.add_argument("--format", choices=("json", "human", "csv"), default="json")
    p.add_argument("--no-timestamp", action="store_true",
                   help="omit the timestamp from reports (CI determinism)")
    p.add_argument("--threads", type=int, default=1,
                   help="cap point-parallel fan-out (results are identical "
                        "at any thread count)")


def _spec_from_args(args):
    if args.spec_file:
        try:
            with open(args.spec_file) as fh:
                doc = json.load(fh)
            return spec_from_dict(doc)
        except (OSError, ValueError, json.JSONDecodeError) as exc:
            raise ConfigError(f"bad spec file {args.spec_file}: {exc}")
    if not args.cls:
        raise ConfigError("either --class or --spec-file is required")
    kwargs = {"kappa": args.p_kappa, "lam": args.p_lambda, "mu": args.p_mu,
              "nu": args.p_nu, "k": args.p_k, "ell": args.p_ell,
              "m": args.p_m, "n": args.p_n}
    try:
        return SystemSpec(args.cls, **kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc))


class ConfigError(Exception):
    pass


def _emit(doc, args, human_lines=None):
    if not args.no_timestamp:
        doc = dict(doc)
        doc["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    if args.format == "human":
        text = "\n".join(human_lines or [json.dumps(doc, sort_keys=True)]) + "\n"
    else:
        text = json.dumps(doc, sort_keys=True, indent=1) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)


def _cmd_verify(args):
    spec = _spec_from_args(args)
    rep = verify_algebra(spec, n_points=args.points, seed=args.seed,
                         tol_bracket=args.tol_bracket, tol_nested=args.tol_nested,
                         threads=args.threads)
    _emit(rep.to_dict(), args, rep.summary_lines())
    return 0 if rep.passed else 1


def _cmd_casimir(args):
    spec = _spec_from_args(args)
    rep = verify_casimir(spec, n_points=args.points, seed=args.seed,
                         tol=args.tol_nested, threads=args.threads)
    _emit(rep.to_dict(), args, rep.summary_lines())
    return 0 if rep.passed else 1


def _cmd_curvature(args):
    spec = _spec_from_args(args)
    c = geometry.classify_curvature(spec, n_points=args.points, seed=args.seed)
    doc = {"schema": "superint-report/1", "kind": "curvature",
           "spec": spec_to_dict(spec), "seed": args.seed, "n_points": args.points,
           "classification": c.tag, "mean": c.mean, "stddev": c.stddev,
           "max_abs": c.max_abs}
    if args.expect:
        ok = c.tag.lower() == args.expect.lower()
        doc["expected"] = args.expect
        doc["pass"] = ok
    _emit(doc, args, [f"curvature {c.tag} mean={c.mean:+.6e} "
                      f"std={c.stddev:.2e} max|K|={c.max_abs:.2e}"])
    return 0 if doc.get("pass", True) else 1


def _cmd_revolution(args):
    spec = _spec_from_args(args)
    out = {}
    for coords in ("liouville", "transformed"):
        out[coords] = geometry.revolution_check(spec, n_points=args.points,
                                                seed=args.seed, coords=coords)
    doc = {"schema": "superint-report/1", "kind": "revolution",
           "spec": spec_to_dict(spec), "seed": args.seed, "n_points": args.points,
           "result": out}
    verified = any(v != "Neither" for v in out.values())
    doc["pass"] = verified
    _emit(doc, args, [f"{c}: {v}" for c, v in out.items()])
    return 0 if verified else 1


def _cmd_linear(args):
    spec = _spec_from_args(args)
    signs = ("plus", "minus") if args.sign == "both" else (args.sign,)
    results = {}
    best = None
    for sign in signs:
        for coords in ("liouville", "transformed"):
            try:
                r = geometry.linear_integral_check(spec, sign, n_points=args.points,
                                                   seed=args.seed, coords=coords)
            except (DomainError, SamplingError):
                continue
            results[f"{sign}/{coords}"] = r
            if best is None or r < best:
                best = r
    doc = {"schema": "superint-report/1", "kind": "linear-integral",
           "spec": spec_to_dict(spec), "seed": args.seed, "n_points": args.points,
           "residuals": results, "tolerance": args.tol_bracket,
           "pass": best is not None and best <= args.tol_bracket}
    _emit(doc, args, [f"{k}: {v:.3e}" for k, v in results.items()])
    return 0 if doc["pass"] else 1


def _cmd_tables(args):
    tables = catalog.TABLES if args.table == "all" else (args.table,)
    rows = []
    ok = True
    for table in tables:
        for entry in catalog.lookup(table=table, include_aliases=False):
            v = catalog.verify_entry(entry, free_draws=args.draws, seed=args.seed,
                                     n_points=args.points)
            rows.append({"table": table, "row_id": entry.row_id,
                         "claim": entry.claim_kind, "status": v.status})
            ok &= v.passed
    doc = {"schema": "superint-report/1", "kind": "tables", "seed": args.seed,
           "draws": args.draws, "rows": rows, "pass": ok}
    human = [f"{r['table']} {r['row_id']:22s} {r['claim']:18s} {r['status']}"
             for r in rows]
    if args.format == "csv":
        text = "table,row_id,claim,status\n" + "\n".join(
            f"{r['table']},{r['row_id']},{r['claim']},{r['status']}" for r in rows) + "\n"
        (open(args.output, "w").write(text) if args.output else sys.stdout.write(text))
        return 0 if ok else 1
    _emit(doc, args, human)
    return 0 if ok else 1


def _cmd_trajectory(args):
    spec = _spec_from_args(args)
    try:
        vals = [float(x) for x in args.initial.split(",")]
        if len(vals) != 4:
            raise ValueError
    except ValueError:
        raise ConfigError("--initial must be 'xi,eta,p_xi,p_eta'")
    point = clamp_energy(spec, PhasePoint(*vals))
    traj = integrate(spec, point, t_end=args.t_end, rel_tol=args.rel_tol,
                     abs_tol=args.abs_tol)
    csv = trajectory_csv(spec, traj)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(csv)
    else:
        sys.stdout.write(csv)
    rep = drift_report(spec, traj)
    summary = {"status": traj.status, "steps": traj.stats,
               "drifts": {k: v["normalized"] for k, v in rep.items()}}
    if traj.exit_time is not None:
        summary["exit_time"] = traj.exit_time
    sys.stderr.write(json.dumps(summary, sort_keys=True) + "\n")
    return 0


def _cmd_dump_catalog(args):
    doc = catalog.catalog_json()
    text = json.dumps(doc, sort_keys=True, indent=1) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="superint",
        description="Numerical certification of 2D superintegrable systems "
                    "with quadratic integrals of motion.")
    sub = parser.add_subparsers(dest="command", required=True)

    def cmd(name, fn, help, points=100, spec=True):
        p = sub.add_parser(name, help=help)
        if spec:
            _add_spec_args(p)
        _add_common(p, points=points)
        p.add_argument("--tol-bracket", type=float, default=TOL_BRACKET,
                       help="tolerance for first brackets")
        p.add_argument("--tol-nested", type=float, default=TOL_NESTED,
                       help="tolerance for nested brackets / Casimir")
        p.set_defaults(fn=fn)
        return p

    cmd("verify", _cmd_verify,
        "verify {H,A}={H,B}={H,C}=0 and the quadratic-algebra rows")
    cmd("casimir", _cmd_casimir, "verify the Casimir identity")
    p = cmd("curvature", _cmd_curvature, "classify the Gaussian curvature",
            points=50)
    p.add_argument("--expect", choices=("zero", "constant", "nonconstant"),
                   help="exit nonzero unless the classification matches")
    cmd("revolution", _cmd_revolution, "directional surface-of-revolution test",
        points=50)
    p = cmd("linear", _cmd_linear, "check a linear integral p_xi +/- p_eta",
            points=50)
    p.add_argument("--sign", choices=("plus", "minus", "both"), default="both")

    p = cmd("tables", _cmd_tables, "sweep the classification tables",
            points=50, spec=False)
    p.add_argument("--table", choices=catalog.TABLES + ("all",), default="all")
    p.add_argument("--draws", type=int, default=5)

    p = cmd("trajectory", _cmd_trajectory,
        "integrate Hamilton's equations and export CSV")
    p.add_argument("--initial", required=True, help="xi,eta,p_xi,p_eta")
    p.add_argument("--t-end", type=float, default=10.0)
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--abs-tol", type=float, default=1e-12)

    p = sub.add_parser("dump-catalog", help="print the embedded table catalog")
    p.add_argument("--output")
    p.set_defaults(fn=_cmd_dump_catalog)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags, matching the config-error contract
        return int(exc.code) if exc.code else 0
    try:
        return args.fn(args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    except (SamplingError, DomainError, StepFailure) as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
