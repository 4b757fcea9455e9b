"""Command-line entry point.

Every subcommand prints its resolved parameters (JSON, on stderr) and then
delegates to the library; the files it writes are the library's own CSV and
manifest outputs. Exit codes: 0 success, 1 validation failure, 2 usage error.
Outputs without an explicit ``--out`` go under ``$TIMESCHWARZ_OUTDIR``
(default ``results``).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .discretize import solve_monolithic
from .experiments import ExperimentSpec, fig_left, fig_right, left_grid, theorem_sweeps
from .model import Decomposition, TimeGrid, Variant, heat_problem_1d
from .schwarz import DEFAULT_SEED, SchwarzConfig, run_schwarz, scalar_contraction_oracle
from .spectral import SpectralParams, optimal_theta, sweep
from .validation import validate

OUTDIR_ENV = "TIMESCHWARZ_OUTDIR"
VARIANTS = [v.value for v in Variant]


def _count(text: str) -> int:
    """Integer flag that also accepts scientific notation such as ``4.096e3``."""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not value.is_integer():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(value)


def default_outdir() -> Path:
    return Path(os.environ.get(OUTDIR_ENV, "results"))


def _add_params(p: argparse.ArgumentParser, alpha: bool = True) -> None:
    p.add_argument("--nu", type=float, default=0.1, help="control cost (default 0.1)")
    p.add_argument("--gamma", type=float, default=10.0, help="terminal weight (default 10)")
    p.add_argument("--T", type=float, default=1.0, help="time horizon (default 1)")
    if alpha:
        p.add_argument("--alpha", type=float, default=0.4, help="interface time (default 0.4)")


def _add_heat(p: argparse.ArgumentParser) -> None:
    p.add_argument("--L", type=float, default=1.0, help="spatial length (default 1)")
    p.add_argument("--nx", type=_count, default=32, help="spatial intervals (default 32)")
    p.add_argument("--nt", type=_count, default=32, help="time intervals (default 32)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="timeschwarz",
        description="Schwarz methods in time for parabolic optimal control.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rho-sweep", help="convergence factor over the d grid, as CSV")
    p.add_argument("--variant", required=True, choices=VARIANTS)
    _add_params(p)
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--theta", type=float, help="relaxation parameter (SD1/SN1)")
    grp.add_argument("--theta-opt", action="store_true", help="use the optimal theta")
    p.add_argument("--literal", action="store_true",
                   help="report |1 - theta F| instead of the relaxed factor")
    p.add_argument("--points", type=_count, default=400, help="log-spaced points (default 400)")
    p.add_argument("--out", type=Path, help="output CSV")

    p = sub.add_parser("theta", help="print the optimal relaxation parameter")
    p.add_argument("--variant", required=True, choices=["SD1", "SN1"])
    _add_params(p)

    p = sub.add_parser("solve", help="monolithic reference on the heat problem, as CSV")
    _add_params(p, alpha=False)
    _add_heat(p)
    p.add_argument("--out", type=Path, help="output CSV")

    p = sub.add_parser("schwarz", help="Schwarz run on the heat problem, as CSV")
    p.add_argument("--variant", required=True, choices=VARIANTS)
    p.add_argument("--theta", type=float, default=1.0, help="relaxation (default 1)")
    _add_params(p)
    _add_heat(p)
    p.add_argument("--max-iter", type=_count, default=30)
    p.add_argument("--tol", type=float, default=1e-6, help="relative to the first error")
    p.add_argument("--order", choices=["sequential", "parallel"], default="sequential")
    p.add_argument("--init", choices=["random", "zeros"], default="random")
    p.add_argument("--seed", type=_count, default=DEFAULT_SEED)
    p.add_argument("--relax-both", action="store_true", help="relax both interface payloads")
    p.add_argument("--out", type=Path, help="output CSV")

    p = sub.add_parser("oracle", help="scalar Schwarz contraction against the analytic factor")
    p.add_argument("--d", type=float, required=True, help="eigenvalue")
    p.add_argument("--variant", required=True, choices=["SD1", "SD2", "SN1", "SN2"])
    p.add_argument("--nt", type=_count, default=4096)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--iterations", type=_count, default=8)
    p.add_argument("--seed", type=_count, default=DEFAULT_SEED)
    _add_params(p)

    p = sub.add_parser("reproduce", help="regenerate an experiment's CSVs and manifest")
    p.add_argument("experiment", choices=["fig-left", "fig-right", "theorems"])
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--seed", type=_count, default=DEFAULT_SEED)
    p.add_argument("--init", choices=["random", "zeros"], default="zeros",
                   help="initial interface data for fig-right (default zeros)")
    p.add_argument("--theta-policy", choices=["fixed", "optimal", "none"], default="fixed",
                   help="extra relaxed SD1/SN1 runs: fixed theta=0.975, optimal theta, or none")
    _add_params(p)
    _add_heat(p)

    p = sub.add_parser("validate", help="run the property suite")
    p.add_argument("--quick", action="store_true", help="skip the slow scalar oracle")
    return parser


def _announce(args: argparse.Namespace) -> None:
    resolved = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()}
    print(json.dumps(resolved, sort_keys=True), file=sys.stderr)


def _cmd_rho_sweep(args) -> int:
    p = SpectralParams(args.nu, args.gamma, args.T, args.alpha)
    theta = optimal_theta(args.variant, p) if args.theta_opt else args.theta
    table = sweep(args.variant, left_grid(args.points), p, theta=theta, literal=args.literal)
    out = args.out or default_outdir() / f"rho_{args.variant}.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(out)
    print(out)
    return 0


def _cmd_theta(args) -> int:
    p = SpectralParams(args.nu, args.gamma, args.T, args.alpha)
    print(f"{optimal_theta(args.variant, p):.17g}")
    return 0


def _cmd_solve(args) -> int:
    prob, _ = heat_problem_1d(args.L, args.nx, args.nu, args.gamma, args.T)
    traj = solve_monolithic(prob, TimeGrid(0.0, args.T, args.nt))
    out = args.out or default_outdir() / "reference.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    traj.to_csv(out)
    print(out)
    return 0


def _cmd_schwarz(args) -> int:
    prob, _ = heat_problem_1d(args.L, args.nx, args.nu, args.gamma, args.T)
    grid = TimeGrid(0.0, args.T, args.nt)
    decomp = Decomposition.nearest(grid, args.alpha)
    cfg = SchwarzConfig(args.variant, theta=args.theta, max_iter=args.max_iter, tol=args.tol,
                        sweep_order=args.order, init=args.init, seed=args.seed,
                        relax_both=args.relax_both)
    report = run_schwarz(prob, decomp, cfg, solve_monolithic(prob, grid))
    out = args.out or default_outdir() / f"schwarz_{args.variant}.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    report.to_csv(out)
    print(f"alpha_used={decomp.alpha:.17g}")
    print(f"iterations={report.iterations}")
    print(f"converged={'true' if report.converged else 'false'}")
    print(f"diverged={'true' if report.diverged else 'false'}")
    print(out)
    return 0


def _cmd_oracle(args) -> int:
    p = SpectralParams(args.nu, args.gamma, args.T, args.alpha)
    measured, analytic = scalar_contraction_oracle(args.d, p, args.variant, nt=args.nt,
                                                   theta=args.theta, iterations=args.iterations,
                                                   seed=args.seed)
    rel = abs(measured - analytic) / analytic if analytic > 0 else abs(measured - analytic)
    print(f"measured={measured:.17g}")
    print(f"analytic={analytic:.17g}")
    print(f"relative_difference={rel:.3e}")
    return 0


def _cmd_reproduce(args) -> int:
    outdir = args.out or default_outdir()
    if args.experiment == "theorems":
        report = theorem_sweeps(seed=args.seed, outdir=outdir)
        for name, s in report["summary"].items():
            print(f"{name}: {s['violations']}/{s['samples']} violations")
        print(outdir / "theorems")
        return 0 if report["passed"] else 1
    name = args.experiment.replace("-", "_")
    spec = ExperimentSpec(name, nu=args.nu, gamma=args.gamma, T=args.T, alpha=args.alpha,
                          L=args.L, nx=args.nx, nt=args.nt, theta_policy=args.theta_policy,
                          outdir=outdir, seed=args.seed, init=args.init)
    if args.experiment == "fig-left":
        fig_left(spec)
    else:
        res = fig_right(spec)
        print(f"threshold={res.threshold:g}")
        for k, it in res.iterations.items():
            status = "diverged" if res.reports[k].diverged else ("not reached" if it is None else it)
            print(f"{k}: {status}")
    print(outdir / name)
    return 0


def _cmd_validate(args) -> int:
    checks = validate(quick=args.quick)
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 0 if failed == 0 else 1


COMMANDS = {
    "rho-sweep": _cmd_rho_sweep,
    "theta": _cmd_theta,
    "solve": _cmd_solve,
    "schwarz": _cmd_schwarz,
    "oracle": _cmd_oracle,
    "reproduce": _cmd_reproduce,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    _announce(args)
    try:
        return COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"timeschwarz {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
