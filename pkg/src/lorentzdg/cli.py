"""Command-line entry point.

    lorentzdg simulate --experiment drift2d --method cidgc --steps 100000 --out run.csv
    lorentzdg drift --in run.csv --invariant H
    lorentzdg converge --experiment drift2d --method cidgc --h-list pi/40,pi/80,pi/160 --t-end 20*pi

Exit codes: 0 success, 2 invalid arguments, 3 solver failure, 4 domain error,
5 I/O error.
"""

from __future__ import annotations

import argparse
import math
import re
import sys

from .errors import DomainError, SolverError
from .fields import EXPERIMENT_IDS
from .harness import (
    RunSpec,
    convergence_study,
    drift_fit,
    read_csv,
    run,
    write_gnuplot_script,
)
from .integrators import METHODS

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_DOMAIN, EXIT_IO = 0, 2, 3, 4, 5

_PI_EXPR = re.compile(r"^\s*(?:([0-9.eE+-]+)\s*\*\s*)?pi\s*(?:/\s*([0-9.eE+-]+))?\s*$")


def parse_number(text: str) -> float:
    """Float, or a multiple/fraction of pi such as ``pi/10`` or ``20*pi``."""
    m = _PI_EXPR.match(text)
    if m:
        factor = float(m.group(1)) if m.group(1) else 1.0
        divisor = float(m.group(2)) if m.group(2) else 1.0
        return factor * math.pi / divisor
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _vector(n):
    def parse(text):
        parts = [parse_number(p) for p in text.split(",")]
        if len(parts) != n:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated values, got {text!r}")
        return parts

    return parse


def _number_list(text):
    return [parse_number(p) for p in text.split(",") if p.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lorentzdg",
        description="Energy-preserving integrators for charged-particle dynamics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate one experiment and write a CSV trajectory")
    sim.add_argument("--experiment", required=True, choices=EXPERIMENT_IDS)
    sim.add_argument("--method", required=True, choices=METHODS)
    sim.add_argument("--h", type=parse_number)
    sim.add_argument("--steps", type=int)
    sim.add_argument("--sample-every", type=int, default=1)
    sim.add_argument("--fp-tol", type=float, default=1e-14)
    sim.add_argument("--fp-max-iter", type=int, default=200)
    sim.add_argument("--eta", type=float, default=1e-12)
    sim.add_argument("--x0", type=_vector(3))
    sim.add_argument("--v0", type=_vector(3))
    sim.add_argument("--orbit", help="named initial data, e.g. transit or banana for tokamak")
    sim.add_argument("--out")
    sim.add_argument("--gnuplot", help="also write a gnuplot script for the CSV")
    sim.add_argument("--full", action="store_true", help="use the long step count (energy-test: 3e6 steps)")

    drift = sub.add_parser("drift", help="fit a line to an invariant error series")
    drift.add_argument("--in", dest="path", required=True)
    drift.add_argument("--invariant", required=True)
    drift.add_argument("--abs", action="store_true", help="fit |error| instead of error")

    conv = sub.add_parser("converge", help="observed order against an RK4 reference")
    conv.add_argument("--experiment", required=True, choices=EXPERIMENT_IDS)
    conv.add_argument("--method", required=True, choices=METHODS)
    conv.add_argument("--h-list", required=True, type=_number_list)
    conv.add_argument("--t-end", required=True, type=parse_number)
    conv.add_argument("--orbit")
    conv.add_argument("--fp-tol", type=float, default=1e-14)
    return parser


def _simulate(args, out):
    if (args.x0 is None) != (args.v0 is None):
        raise ValueError("--x0 and --v0 must be given together")
    initial = None if args.x0 is None else (*args.x0, *args.v0)
    if args.gnuplot and not args.out:
        raise ValueError("--gnuplot requires --out")
    spec = RunSpec(
        experiment=args.experiment, method=args.method, h=args.h, steps=args.steps,
        sample_every=args.sample_every, fp_tol=args.fp_tol, fp_max_iter=args.fp_max_iter,
        eta=args.eta, initial=initial, orbit=args.orbit, out_path=args.out, full=args.full,
    )
    record = run(spec)
    print(f"experiment={spec.experiment} method={spec.method} h={spec.step_size!r} "
          f"steps={spec.n_steps} rows={len(record)} wall_time={record.meta['wall_time']:.3f}s",
          file=out)
    if spec.method in ("cidg1", "cidg2", "cidgc"):
        print(f"fixed-point iterations: total={record.meta['fp_total_iterations']} "
              f"max_per_step={record.meta['fp_max_iterations']}", file=out)
    for name in record.invariant_names:
        print(f"{name}: initial={record.invariants[name][0]!r} "
              f"max_abs_err={record.max_abs_error(name):.6e}", file=out)
    if args.gnuplot:
        write_gnuplot_script(args.out, args.gnuplot, record.invariant_names)


def _drift(args, out):
    record = read_csv(args.path)
    fit = drift_fit(record, args.invariant, absolute=args.abs)
    print(f"slope={fit.slope!r} intercept={fit.intercept!r} r2={fit.r_squared!r}"
          + (" degenerate" if fit.degenerate else ""), file=out)


def _converge(args, out):
    rows = convergence_study(args.experiment, args.method, args.h_list, args.t_end,
                             orbit=args.orbit, fp_tol=args.fp_tol)
    print("h,error,order", file=out)
    for row in rows:
        print(f"{row.h!r},{row.error!r},{row.order!r}", file=out)


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return exc.code
    handler = {"simulate": _simulate, "drift": _drift, "converge": _converge}[args.command]
    try:
        handler(args, out)
    except SolverError as exc:
        _report(exc)
        return EXIT_SOLVER
    except DomainError as exc:
        _report(exc)
        return EXIT_DOMAIN
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _report(exc):
    where = f" at step {exc.step}" if exc.step is not None else ""
    print(f"error{where}: {exc}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
