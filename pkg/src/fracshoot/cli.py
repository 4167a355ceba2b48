"""
Command-line front end.

::

    fracshoot solve --problem ex2 --method bdf2 --step 0.0035
    fracshoot shoot --problem ex1 --method adams --step 0.0005 --eps 1e-6 --strategy auto
    fracshoot bench --problem ex2 --eps 1e-10
    fracshoot mlf --alpha 0.3 --z -2.5

Exit status: 0 on success, 1 on invalid input, 2 on numerical failure
(including a shooting run that does not converge).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import FracShootError, NumericalError, ValidationError
from .ivp import SolverConfig, solve_ivp
from .mlf import DEFAULT_TOL, MlfRequest, evaluate
from .problems import PROBLEM_IDS, catalog

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_NUMERICAL = 2

# Initial values of the built-in problems' forward solves.
_TRUE_Y0 = {"ex1": 0.0, "ex2": 2.8, "ex3": 1.0}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 otherwise
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fracshoot", description="Shooting for Caputo terminal value problems.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(sp, multi=False):
        sp.add_argument("--problem", required=True, choices=PROBLEM_IDS)
        sp.add_argument("--alpha", type=float, default=None, help="override the problem's order")
        if multi:
            sp.add_argument("--method", action="append", choices=("adams", "bdf2", "trapezoidal"),
                            help="IVP solver (repeatable; default adams and bdf2)")
            sp.add_argument("--step", action="append", type=_positive_float,
                            help="step size (repeatable; default: the problem's three steps)")
        else:
            sp.add_argument("--method", default="adams", choices=("adams", "bdf2", "trapezoidal"))
            sp.add_argument("--step", type=_positive_float, required=True)
        sp.add_argument("--out", type=Path, default=None, help="output file (default stdout)")

    s = sub.add_parser("solve", help="solve one initial value problem")
    common(s)
    s.add_argument("--y0", type=float, default=None,
                   help="initial value (default: the problem's true initial value)")
    s.add_argument("--format", choices=("csv", "json"), default="csv")

    s = sub.add_parser("shoot", help="solve one terminal value problem")
    common(s)
    s.add_argument("--eps", type=_positive_float, default=1e-6)
    s.add_argument("--strategy", choices=("unit", "midpoint", "auto", "bisection"), default="unit")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--bundle", type=Path, default=None,
                   help="directory for one trajectory CSV per shot plus manifest.json")

    s = sub.add_parser("bench", help="run an experiment matrix")
    common(s, multi=True)
    s.add_argument("--eps", action="append", type=_positive_float,
                   help="tolerance (repeatable; default 1e-6, 1e-8, 1e-10)")
    s.add_argument("--strategy", action="append",
                   choices=("unit", "midpoint", "auto", "bisection"),
                   help="strategy (repeatable; default all four)")
    s.add_argument("--repeat", type=int, default=3, help="timed repetitions per cell")
    s.add_argument("--include-setup", action="store_true",
                   help="rebuild weight tables inside every timed run")
    s.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: FRACSHOOT_WORKERS or 1)")
    s.add_argument("--format", choices=("csv", "json", "table"), default="csv")

    s = sub.add_parser("mlf", help="evaluate the Mittag-Leffler function")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--z", type=float, required=True)
    s.add_argument("--tol", type=_positive_float, default=DEFAULT_TOL)
    s.add_argument("--format", choices=("text", "json"), default="text")
    return p


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _cmd_solve(args) -> int:
    prob = catalog(args.problem, args.alpha)
    y0 = _TRUE_Y0[prob.id] if args.y0 is None else args.y0
    traj = solve_ivp(prob.tvp.ivp(y0), prob.mesh(args.step), SolverConfig(args.method))
    if args.format == "csv":
        _emit(traj.to_csv(), args.out)
    else:
        doc = {"problem": prob.id, "alpha": prob.alpha, "method": args.method, "h": args.step,
               "y0": y0, "t": traj.t.tolist(), "y": traj.values.tolist()}
        _emit(json.dumps(doc) + "\n", args.out)
    return EXIT_OK


def _cmd_shoot(args) -> int:
    from .bench import emit_figure_bundle, rows_to_csv, run_shooting, summarize

    prob = catalog(args.problem, args.alpha)
    if args.bundle is not None:
        bundle = emit_figure_bundle(prob.id, args.strategy, args.method, args.step, args.eps,
                                    args.bundle, args.alpha)
        report = bundle.report
    else:
        report = run_shooting(prob, args.method, args.step, args.eps, args.strategy)
    err = prob.max_error(report.trajectory)
    if args.format == "csv":
        row = summarize(prob.id, args.method, args.step, report, err, report.wall_time)
        _emit(rows_to_csv([row]), args.out)
    else:
        doc = report.as_dict()
        doc.update(problem=prob.id, solver=args.method, h=args.step, max_error=err)
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
    if not report.converged:
        print(f"fracshoot: {report.message}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_bench(args) -> int:
    from .bench import (DEFAULT_EPS, DEFAULT_SOLVERS, STRATEGIES, ExperimentMatrix,
                        format_table, rows_to_csv, rows_to_json, run_matrix)

    m = ExperimentMatrix(
        problem=args.problem,
        solvers=tuple(args.method or DEFAULT_SOLVERS),
        steps=tuple(args.step) if args.step else None,
        eps=tuple(args.eps or DEFAULT_EPS),
        strategies=tuple(args.strategy or STRATEGIES),
        repetitions=args.repeat,
        alpha=args.alpha,
        include_setup=args.include_setup,
    )
    if args.workers is not None and args.workers < 1:
        raise ValidationError("--workers must be positive")
    rows = run_matrix(m, args.workers)
    text = {"csv": rows_to_csv, "json": rows_to_json, "table": format_table}[args.format](rows)
    _emit(text, args.out)
    return EXIT_OK


def _cmd_mlf(args) -> int:
    res = evaluate(MlfRequest(args.alpha, args.z, args.tol))
    if args.format == "json":
        print(json.dumps({"alpha": args.alpha, "z": args.z, "value": res.value,
                          "error_bound": res.error_bound, "regime": res.regime}))
    else:
        print(f"{res.value:.17g}")
    return EXIT_OK


_COMMANDS = {"solve": _cmd_solve, "shoot": _cmd_shoot, "bench": _cmd_bench, "mlf": _cmd_mlf}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"fracshoot: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalError, FracShootError) as exc:
        print(f"fracshoot: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
