"""Command-line front end.

Exit codes: 0 success, 1 invalid input (problem file, suite name),
2 evaluation error, 3 validation residual over tolerance, 4 golden mismatch.
"""
from __future__ import annotations

import argparse
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .core import fd_gradient, fd_hessian
from .dependency import others, validate_model
from .errors import DegenerateConditionalError, DepcalcError
from .golden import GOLDEN_TOL, SUITES, run_suite
from .jacobians import (explanatory_column, fd_explanatory_column, fd_second_derivative_column,
                        second_derivative_column)
from .problem import EvaluationFailure, ProblemValidationError, dumps_report, evaluate, read_problem

EXIT_OK, EXIT_INVALID, EXIT_EVAL, EXIT_VALIDATE, EXIT_GOLDEN = 0, 1, 2, 3, 4

FIRST_ORDER_TOL = 1e-6
SECOND_ORDER_TOL = 1e-4
ROUND_TRIP_TOL = 1e-10
PROBES = 100


def _err(msg: str):
    print(f"depcalc: {msg}", file=sys.stderr)


def _write_atomic(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".depcalc-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def cmd_run(args) -> int:
    try:
        problem = read_problem(args.problem, args.rank_tol)
    except OSError as exc:
        _err(f"cannot read problem file: {exc}")
        return EXIT_INVALID
    except ProblemValidationError as exc:
        _err(f"invalid problem file: {exc}")
        return EXIT_INVALID
    try:
        report = evaluate(problem)
    except EvaluationFailure as exc:
        _err(f"evaluation error: {exc}")
        return EXIT_EVAL
    text = dumps_report(report)
    if args.output is None or args.output == "-":
        sys.stdout.write(text)
    else:
        _write_atomic(args.output, text)
    return EXIT_OK


def _rel(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / (1.0 + np.abs(b)), initial=0.0))


def _jacobian_checks(model, k, rng, probes):
    """Worst explanatory/second-derivative column residual per index against FD of the forward map."""
    rows = []
    xs = model.sample_explanatory(0, probes, rng)
    zs = model.sample_innovations(probes, rng)
    points = []
    for x0, z in zip(xs, zs):
        gp = np.empty(model.dim)
        gp[0] = x0
        gp[others(model.dim, 0)] = model.forward(0, x0, z)
        points.append(gp)
    for j in range(model.dim):
        worst1 = worst2 = 0.0
        status = "ok"
        for gp in points:
            try:
                c1 = explanatory_column(model, gp, j).values
                c2 = second_derivative_column(model, gp, j)
                worst1 = max(worst1, _rel(c1, fd_explanatory_column(model, gp, j)))
                worst2 = max(worst2, _rel(c2, fd_second_derivative_column(model, gp, j)))
            except DegenerateConditionalError:
                status = "degenerate"
                break
            except (DepcalcError, ArithmeticError, ValueError) as exc:
                status = f"error: {exc}"
                worst1 = worst2 = float("inf")
                break
        rows.append((f"group {k} column {j}", "explanatory_column", worst1, FIRST_ORDER_TOL, status))
        rows.append((f"group {k} column {j}", "second_derivative_column", worst2, SECOND_ORDER_TOL, status))
    return rows


def validation_rows(problem, seed: int, probes: int = PROBES) -> list:
    """``(subject, check, residual, tolerance, status)`` rows for every check."""
    rows = []
    rng = np.random.default_rng(seed)
    for k, model in enumerate(problem.models, start=1):
        rep = validate_model(model, probes, seed + k, ROUND_TRIP_TOL, FIRST_ORDER_TOL, SECOND_ORDER_TOL)
        for c in rep.checks:
            subject = f"group {k} model j={c.j}"
            status = "error: " + c.errors[0] if c.errors else "ok"
            rt_status = "degenerate" if c.degenerate else status
            rows.append((subject, "round_trip", c.round_trip, ROUND_TRIP_TOL, rt_status))
            rows.append((subject, "d1_forward", c.d1, FIRST_ORDER_TOL, status))
            rows.append((subject, "d2_forward", c.d2, SECOND_ORDER_TOL, status))
        rows.extend(_jacobian_checks(model, k, rng, probes))
    f = problem.scalar_field
    for n, x in enumerate(problem.points):
        subject = f"field at point {n}"
        try:
            rows.append((subject, "gradient", _rel(f.gradient(x), fd_gradient(f, x)), FIRST_ORDER_TOL, "ok"))
            rows.append((subject, "hessian", _rel(f.hessian(x), fd_hessian(f, x)), SECOND_ORDER_TOL, "ok"))
        except (DepcalcError, ArithmeticError) as exc:
            rows.append((subject, "gradient", float("inf"), FIRST_ORDER_TOL, f"error: {exc}"))
    return rows


def row_failed(row) -> bool:
    _, _, residual, tol, status = row
    if status.startswith("error"):
        return True
    return status != "degenerate" and not residual <= tol


def cmd_validate(args) -> int:
    try:
        problem = read_problem(args.problem, args.rank_tol)
    except OSError as exc:
        _err(f"cannot read problem file: {exc}")
        return EXIT_INVALID
    except ProblemValidationError as exc:
        _err(f"invalid problem file: {exc}")
        return EXIT_INVALID
    rows = validation_rows(problem, args.seed)
    print(f"{'subject':<28} {'check':<26} {'residual':>12} {'tol':>8}  status")
    for row in rows:
        subject, check, residual, tol, status = row
        mark = "FAIL" if row_failed(row) else status
        print(f"{subject:<28} {check:<26} {residual:>12.3e} {tol:>8.0e}  {mark}")
    failed = [r for r in rows if row_failed(r)]
    if failed:
        worst = max(failed, key=lambda r: r[2] / r[3])
        print(f"worst residual: {worst[0]} {worst[1]} = {worst[2]:.3e} (tol {worst[3]:.0e})")
        return EXIT_VALIDATE
    print(f"all {len(rows)} checks within tolerance")
    return EXIT_OK


def cmd_golden(args, tamper=None) -> int:
    if args.suite not in SUITES:
        _err(f"unknown suite {args.suite!r}")
        return EXIT_INVALID
    rows = run_suite(args.suite, tamper)
    bad = [r for r in rows if not r.passed]
    if bad:
        print(f"{'rho':>6} {'point':<14} {'quantity':<20} {'abs error':>12}")
        for r in bad:
            print(f"{r.rho:>6} {str(r.point):<14} {r.quantity:<20} {r.error:>12.3e}")
        print(f"{len(bad)} of {len(rows)} comparisons exceed {GOLDEN_TOL:.0e}")
        return EXIT_GOLDEN
    print(f"{args.suite}: {len(rows)} comparisons within {GOLDEN_TOL:.0e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="depcalc",
        description="Derivatives, gradients and Hessians of functions with dependent inputs.")
    parser.add_argument("--version", action="version", version=f"depcalc {__version__}")
    parser.add_argument("--rank-tol", type=float, default=None,
                        help="relative eigenvalue floor for the metric pseudoinverse")
    parser.add_argument("--seed", type=int, default=0, help="seed for random probes (u64)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="evaluate a problem file and write a JSON report")
    p.add_argument("problem")
    p.add_argument("-o", "--output", default=None, help="report path (default: stdout)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="check models and derivatives against finite differences")
    p.add_argument("problem")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("golden", help="run a built-in golden suite")
    p.add_argument("suite")
    p.set_defaults(func=cmd_golden)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed < 0 or args.seed >= 2 ** 64:
        _err("--seed must be an unsigned 64-bit integer")
        return EXIT_INVALID
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
