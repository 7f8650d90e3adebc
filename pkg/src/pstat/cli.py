"""Command-line front end: ``pstat <subcommand> [options]``.

Each subcommand writes a table (CSV, or JSON records with ``--format json``)
and a JSON summary embedding the fully resolved configuration into
``--output-dir``.  Outputs contain no timestamps, so identical arguments give
byte-identical files.

Exit status: 0 on success, 1 when a reported verdict fails, 2 on invalid
input and 3 on numerical failure.
"""

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._validation import PStatError
from .asymptotics import DEFAULT_RADII, ExpansionKind, expansion_report
from .circle_stats import CircleSpec, circle_statistics
from .counterexample import (
    DERIVATIVE_CUBIC_COEFFICIENT,
    FE2_QUARTIC_COEFFICIENT,
    counterexample_table,
)
from .fields import BATTERY_IDS, field_from_id
from .operators import check_decompositions, evaluate_operators, nondegenerate_points
from .solver import SCHEMES, GridDomain, SolverProblem, solve

EXIT_VERDICT = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

DECOMP_TOL = 1e-11
TRACE_TOL = 1e-12


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------- parsing


def _pair(text):
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'x1,x2', got {text!r}") from None
    return a, b


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ladder(text):
    """``a:b:n``: ``n`` geometrically spaced values from ``a`` to ``b``."""
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'start:stop:count', got {text!r}") from None
    if not (a > 0 and b > 0 and n >= 1):
        raise argparse.ArgumentTypeError("ladder needs positive endpoints and count >= 1")
    return [float(v) for v in np.geomspace(a, b, n)]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pstat",
        description="Local statistics, mean-value expansions and p-harmonic solvers in the plane.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", default="out", help="directory for outputs (default ./out)")
    common.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="format of the tabular output (default csv)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized sweeps")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("stats", parents=[common], help="circle and disk statistics of a field")
    p.add_argument("--field", default="paraboloid")
    p.add_argument("--center", type=_pair, default=(0.3, 0.2))
    p.add_argument("--eps", type=_floats, default=[0.1])
    p.add_argument("--samples", type=int, default=256)
    p.add_argument("--rings", type=int, default=16)
    p.add_argument("--median", choices=("sampled", "antipodal"), default="sampled")

    p = sub.add_parser("verify-decomp", parents=[common],
                       help="agreement of the p-Laplacian rearrangements")
    p.add_argument("--field", action="append", default=None,
                   help="field id (repeatable; default: the whole battery)")
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--p", type=_floats, default=[1.1, 1.5, 2.0, 3.0, 10.0])

    p = sub.add_parser("expand", parents=[common], help="expansion remainders on a radius ladder")
    p.add_argument("--field", default="sinexp")
    p.add_argument("--x", type=_pair, default=(0.3, 0.2))
    p.add_argument("--kind", default="boundary-mean",
                   choices=[k.value for k in ExpansionKind])
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--radii", type=_ladder, default=None,
                   help="start:stop:count, geometric (default 2^-3 .. 2^-10)")
    p.add_argument("--samples", type=int, default=256)
    p.add_argument("--rings", type=int, default=16)

    p = sub.add_parser("solve", parents=[common], help="Dirichlet problem by value iteration")
    p.add_argument("--config", required=True, help="problem JSON file")

    p = sub.add_parser("counterexample", parents=[common],
                       help="failure of the exact identities for the fundamental solution")
    p.add_argument("--eps-ladder", type=_ladder, default=_ladder("1e-3:1e-1:16"),
                   help="start:stop:count, geometric (default 1e-3:1e-1:16)")
    return parser


# ---------------------------------------------------------------- output


def _num(v):
    """Shortest round-trip text for floats, so outputs are reproducible."""
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    return v


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return _num(obj)


def _write_json(path, obj):
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n")


def _write_table(out_dir, stem, columns, rows, fmt):
    rows = [[_num(v) for v in row] for row in rows]
    if fmt == "json":
        path = out_dir / f"{stem}.json"
        _write_json(path, [dict(zip(columns, row)) for row in rows])
        return path
    path = out_dir / f"{stem}.csv"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    path.write_text(buf.getvalue())
    return path


# ---------------------------------------------------------------- commands


def _common_config(args):
    return {"subcommand": args.subcommand, "output_dir": args.output_dir,
            "format": args.format, "seed": args.seed}


def cmd_stats(args):
    field = field_from_id(args.field)
    config = {**_common_config(args), "field": args.field, "center": list(args.center),
              "eps": args.eps, "samples": args.samples, "rings": args.rings,
              "median": args.median}
    rows = []
    for eps in args.eps:
        spec = CircleSpec(args.center, eps, args.samples)
        stats = circle_statistics(field, spec, args.rings, args.median)
        for name, value in stats.as_dict().items():
            rows.append((args.field, args.center[0], args.center[1], eps, args.samples,
                         name, value))
    columns = ("field", "cx", "cy", "eps", "M", "stat_name", "value")
    return "stats", columns, rows, {"config": config}, True


def cmd_verify_decomp(args):
    ids = args.field or list(BATTERY_IDS)
    config = {**_common_config(args), "fields": ids, "points": args.points, "p": args.p,
              "decomposition_tolerance": DECOMP_TOL, "trace_tolerance": TRACE_TOL}
    rng = np.random.default_rng(args.seed)
    rows = []
    worst_decomp = worst_trace = 0.0
    for fid in ids:
        field = field_from_id(fid)
        for x in nondegenerate_points(field, args.points, rng):
            for p in args.p:
                res = check_decompositions(field, x, p)
                ops = evaluate_operators(field, x, p)
                trace = abs(ops.one_laplacian + ops.infty_laplacian - ops.laplacian) / max(
                    1.0, abs(ops.one_laplacian) + abs(ops.infty_laplacian))
                rel = res.max_relative()
                worst_decomp = max(worst_decomp, rel)
                worst_trace = max(worst_trace, trace)
                rows.append((fid, x.x1, x.x2, p, res.mean_infty, res.mean_one,
                             res.one_infty, rel, trace))
    ok = worst_decomp <= DECOMP_TOL and worst_trace <= TRACE_TOL
    summary = {"config": config, "max_relative_decomposition": worst_decomp,
               "max_relative_trace": worst_trace, "passed": ok}
    columns = ("field", "x1", "x2", "p", "res_mean_infty", "res_mean_one", "res_one_infty",
               "max_relative", "trace_relative")
    return "verify-decomp", columns, rows, summary, ok


def cmd_expand(args):
    field = field_from_id(args.field)
    radii = tuple(sorted(args.radii, reverse=True)) if args.radii else DEFAULT_RADII
    config = {**_common_config(args), "field": args.field, "x": list(args.x),
              "kind": args.kind, "p": args.p, "radii": list(radii),
              "samples": args.samples, "rings": args.rings}
    report = expansion_report(field, args.x, args.kind, args.p, radii, args.samples,
                              args.rings)
    columns = ("field", "x1", "x2", "kind", "p", "eps", "residual", "normalized_residual")
    return "expand", columns, list(report.rows()), {"config": config, **report.summary()}, True


_DOMAIN_KEYS = {"rectangle": ("x0", "x1", "y0", "y1"), "annulus": ("r_in", "r_out", "center")}
_DEFAULT_DOMAINS = {"rectangle": {"x0": 0.0, "x1": 1.0, "y0": 0.0, "y1": 1.0},
                    "annulus": {"r_in": 0.5, "r_out": 1.5, "center": [0.0, 0.0]}}
_SOLVE_KEYS = {"domain", "h", "boundary", "p", "scheme", "eps", "M", "rings", "damping",
               "tol", "max_iters", "init"}


def load_problem(config):
    """Build a :class:`SolverProblem` from a parsed JSON configuration."""
    unknown = set(config) - _SOLVE_KEYS
    if unknown:
        raise UsageError(f"unknown config keys {sorted(unknown)}")
    dom = dict(config.get("domain", {"shape": "rectangle"}))
    shape = dom.pop("shape", "rectangle")
    if shape not in _DOMAIN_KEYS:
        raise UsageError(f"domain shape must be one of {sorted(_DOMAIN_KEYS)}")
    extra = set(dom) - set(_DOMAIN_KEYS[shape])
    if extra:
        raise UsageError(f"unknown {shape} keys {sorted(extra)}")
    params = {**_DEFAULT_DOMAINS[shape], **dom}
    h = float(config.get("h", 1 / 64))
    if shape == "rectangle":
        domain = GridDomain.rectangle(h=h, **params)
    else:
        domain = GridDomain.annulus(params["r_in"], params["r_out"],
                                    tuple(params["center"]), h)
    scheme = config.get("scheme", "fe2")
    if scheme not in SCHEMES:
        raise UsageError(f"scheme must be one of {SCHEMES}")
    init = config.get("init", "mean")
    if init not in ("mean", "extend"):
        raise UsageError("init must be 'mean' or 'extend'")
    return SolverProblem(domain, field_from_id(config.get("boundary", "saddle")),
                         p=float(config.get("p", 2.0)), scheme=scheme,
                         eps=config.get("eps"), M=int(config.get("M", 64)),
                         rings=int(config.get("rings", 4)),
                         damping=float(config.get("damping", 1.0)),
                         tol=float(config.get("tol", 1e-10)),
                         max_iters=config.get("max_iters"), init=init)


def cmd_solve(args):
    try:
        raw = json.loads(Path(args.config).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise UsageError("config must be a JSON object")
    problem = load_problem(raw)
    result = solve(problem)
    X, Y = result.grid.coordinates()
    finite = np.isfinite(result.values)
    rows = list(zip(X[finite].tolist(), Y[finite].tolist(), result.values[finite].tolist()))
    config = {**_common_config(args), "config_file": str(args.config),
              "problem": problem.to_dict()}
    summary = {
        "config": config,
        "iterations": result.iterations,
        "final_change": result.final_change,
        "converged": result.converged,
        "range_bound_held": result.range_bound_held,
        "interior_nodes": int(result.interior.sum()),
        "sup_deviation_from_boundary_field": result.sup_error(problem.boundary_data),
    }
    return "solve", ("x1", "x2", "value"), rows, summary, result.converged


def cmd_counterexample(args):
    ladder = sorted(args.eps_ladder)
    if not all(0 < e < 1 for e in ladder):
        raise UsageError("eps values must lie in (0, 1)")
    config = {**_common_config(args), "eps_ladder": ladder}
    rows, verdict = counterexample_table(ladder)
    smallest = rows[0]
    cubic = smallest["D_plus_eps_over_eps3"]
    quartic = smallest["fe2_residual_over_eps4"]
    checks = {
        "derivative_identity_fails": bool(verdict["derivative_identity_fails"]),
        "fe2_residual_positive": bool(verdict["fe2_residual_positive"]),
        "cubic_coefficient_within_2pct": bool(
            abs(cubic / DERIVATIVE_CUBIC_COEFFICIENT - 1) <= 0.02),
        "quartic_coefficient_within_1pct": bool(
            abs(quartic / FE2_QUARTIC_COEFFICIENT - 1) <= 0.01),
    }
    summary = {
        "config": config,
        "smallest_eps": smallest["eps"],
        "cubic_coefficient_estimate": cubic,
        "cubic_coefficient_expected": DERIVATIVE_CUBIC_COEFFICIENT,
        "quartic_coefficient_estimate": quartic,
        "quartic_coefficient_expected": FE2_QUARTIC_COEFFICIENT,
        "checks": checks,
        "passed": all(checks.values()),
    }
    columns = ("eps", "D", "D_plus_eps_over_eps3", "fe2_residual", "fe2_residual_over_eps4")
    return ("counterexample", columns, [[r[c] for c in columns] for r in rows], summary,
            summary["passed"])


COMMANDS = {
    "stats": cmd_stats,
    "verify-decomp": cmd_verify_decomp,
    "expand": cmd_expand,
    "solve": cmd_solve,
    "counterexample": cmd_counterexample,
}


def run(args):
    """Dispatch parsed arguments; returns the exit status."""
    stem, columns, rows, summary, ok = COMMANDS[args.subcommand](args)
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    table = _write_table(out_dir, stem, columns, rows, args.format)
    _write_json(out_dir / f"{stem}_summary.json", summary)
    print(f"wrote {table} and {out_dir / f'{stem}_summary.json'}")
    return 0 if ok else EXIT_VERDICT


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except (UsageError, ValueError, TypeError) as exc:
        print(f"pstat {args.subcommand}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PStatError, ArithmeticError, RuntimeError) as exc:
        print(f"pstat {args.subcommand}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
