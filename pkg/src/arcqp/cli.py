"""Command-line front end.

    arcqp solve-qp problem.json [--out-dir DIR]
    arcqp lqr problem.json [--out-dir DIR]
    arcqp demo [--mode theoretical]

Exit codes: 0 converged, 2 bad input, 3 numerical failure, 4 gap fell
below sigma before convergence, 5 iteration limit reached.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .lqr import LqrProblem, bertsekas_example, condense, simulate
from .problem_file import load_problem, write_csv
from .qp_core import MAX_THETA, BoxQP, Mode, ProblemError, SolverOptions
from .solver import SolveReport, SolveStatus, solve

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NUMERICAL = 3
EXIT_MU_BELOW_SIGMA = 4
EXIT_MAX_ITER = 5

_EXIT_CODES = {
    SolveStatus.CONVERGED: EXIT_OK,
    SolveStatus.NUMERICAL_FAILURE: EXIT_NUMERICAL,
    SolveStatus.MU_BELOW_SIGMA: EXIT_MU_BELOW_SIGMA,
    SolveStatus.MAX_ITER_REACHED: EXIT_MAX_ITER,
}

SATURATION_TOL = 1e-6
ITERATION_HEADER = ["k", "mu", "sin_alpha", "kappa", "rX", "rY", "rZ"]


def exit_code(status: SolveStatus) -> int:
    return _EXIT_CODES[status]


def _theta(text: str) -> float:
    value = float(text)
    if not 0.0 < value <= MAX_THETA:
        raise argparse.ArgumentTypeError(f"theta must lie in (0, {MAX_THETA}]")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0.0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--theta", type=_theta, default=MAX_THETA,
                        help="neighborhood radius (default 0.19, maximum 0.19)")
    common.add_argument("--eps", type=_positive_float, default=1e-8,
                        help="termination tolerance (default 1e-8)")
    common.add_argument("--sigma", type=_positive_float, default=1e-10,
                        help="duality-gap floor for the step rule (default 1e-10)")
    common.add_argument("--max-iter", type=_positive_int, default=200)
    common.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.PRACTICAL.value)
    common.add_argument("--out-dir", type=Path, default=Path("."))
    common.add_argument("--log", choices=["none", "csv"], default="csv",
                        help="write the iteration log as iterations.csv")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="arcqp",
        description="Arc-search interior-point solver for box-constrained QPs and saturated LQR.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("solve-qp", parents=[common], help="solve a box_qp problem file")
    p.add_argument("path", type=Path)
    p = sub.add_parser("lqr", parents=[common], help="condense, solve and simulate an lqr problem file")
    p.add_argument("path", type=Path)
    p = sub.add_parser("demo", parents=[common],
                       help="built-in oscillator design example (T=50, N=500)")
    p.add_argument("--T", type=_positive_float, default=50.0, help="time horizon")
    p.add_argument("--N", type=_positive_int, default=500, help="number of steps")
    return parser


def _options(args) -> SolverOptions:
    return SolverOptions(theta=args.theta, eps=args.eps, sigma=args.sigma,
                         max_iter=args.max_iter, mode=Mode(args.mode))


def _write_log(args, report: SolveReport) -> None:
    if args.log != "csv":
        return
    rows = [(r.k, r.mu, r.sin_alpha, r.kappa, r.r_x, r.r_y, r.r_z) for r in report.iterations]
    write_csv(args.out_dir / "iterations.csv", ITERATION_HEADER, rows)


def _summary(report: SolveReport) -> None:
    print(f"status: {report.status.value}")
    print(f"iterations: {report.n_iter}")
    if report.message:
        print(f"message: {report.message}", file=sys.stderr)


def run_box_qp(qp: BoxQP, args, opts: SolverOptions) -> int:
    report = solve(qp, opts)
    write_csv(args.out_dir / "solution.csv", ["index", "x"], enumerate(report.x))
    _write_log(args, report)
    _summary(report)
    print(f"objective: {report.objective:.17g}")
    return exit_code(report.status)


def run_lqr(lqr: LqrProblem, args, opts: SolverOptions) -> int:
    cq = condense(lqr)
    report = solve(cq.qp, opts)
    u = cq.controls(report.x)
    states, cost = simulate(lqr, u)
    write_csv(args.out_dir / "controls.csv",
              ["step"] + [f"u{i + 1}" for i in range(lqr.m)],
              [(k, *row) for k, row in enumerate(u)])
    write_csv(args.out_dir / "trajectory.csv",
              ["step"] + [f"x{i + 1}" for i in range(lqr.r)],
              [(k, *row) for k, row in enumerate(states)])
    _write_log(args, report)
    _summary(report)
    saturated = int(np.sum(np.abs(u) >= 1.0 - SATURATION_TOL))
    print(f"objective J: {cost:.17g}")
    print(f"saturated controls: {saturated} of {u.size}")
    return exit_code(report.status)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        opts = _options(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    if args.command == "demo":
        lqr = bertsekas_example(T=args.T, N=args.N)
        code = run_lqr(lqr, args, opts)
        print("reference: the published run of this example converges in 27 iterations")
        return code

    try:
        problem = load_problem(args.path)
    except ProblemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if args.command == "solve-qp":
        if not isinstance(problem, BoxQP):
            print("error: solve-qp expects a problem of type 'box_qp'", file=sys.stderr)
            return EXIT_PARSE
        return run_box_qp(problem, args, opts)
    if not isinstance(problem, LqrProblem):
        print("error: lqr expects a problem of type 'lqr'", file=sys.stderr)
        return EXIT_PARSE
    return run_lqr(problem, args, opts)


if __name__ == "__main__":
    sys.exit(main())
