"""Command-line front end.

Subcommands: ``gen`` (constraint files), ``solve`` (distribution
estimates), ``sample`` (polytope walks), ``compare`` (distribution gaps),
and ``experiment`` (the reference experiment bundle).  Every command is
deterministic given its flags; all randomness flows from ``--seed``.

Exit codes: 0 success, 1 I/O failure, 2 usage or validation error,
3 numerical failure (the message names the error class).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ._version import __version__
from .analysis import (
    DEFAULT_EXPERIMENT_SEED,
    compare_distributions,
    gen_gaussian_constraints,
    leading_order_estimate,
    run_figure1,
    write_figure1_bundle,
)
from .errors import FileFormatError, NumericalError, PolycentError
from .maxent import solve_maxent
from .model import (
    _atomic_write_text,
    read_constraints,
    read_distribution,
    read_stats,
    write_constraints,
    write_distribution,
    write_stats,
)
from .sampler import chart, hit_and_run, variance_estimates
from .saddle import (
    SolverOptions,
    centroid_first_order,
    centroid_second_order,
    solve_saddle,
)

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polycent",
        description="Centroid inference for linearly constrained distributions.",
    )
    parser.add_argument("--version", action="version", version=f"polycent {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a Gaussian constraint file")
    gen.add_argument("--n", type=int, required=True, help="number of states")
    gen.add_argument("--c", type=int, required=True, help="number of constraints")
    gen.add_argument("--sigma", type=float, default=1.0, help="coefficient scale")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True)

    solve = sub.add_parser("solve", help="estimate a distribution")
    solve.add_argument("--in", dest="infile", required=True)
    solve.add_argument(
        "--method", choices=("c1", "c2", "maxent", "leading"), required=True
    )
    solve.add_argument("--out", required=True)
    solve.add_argument("--meta", default=None, help="metadata JSON path")
    solve.add_argument("--max-iter", type=int, default=200)
    solve.add_argument("--tol", type=float, default=1e-12)

    sample = sub.add_parser("sample", help="run a hit-and-run walk")
    sample.add_argument("--in", dest="infile", required=True)
    sample.add_argument("--steps", type=int, required=True)
    sample.add_argument("--seed", type=int, required=True)
    sample.add_argument("--burn-in", type=int, default=10_000)
    sample.add_argument("--thin", type=int, default=10)
    sample.add_argument("--out", required=True)

    compare = sub.add_parser("compare", help="compare two distribution files")
    compare.add_argument("first")
    compare.add_argument("second")
    compare.add_argument("--stats", default=None, help="stats JSON for widths")
    compare.add_argument("--out", required=True)

    experiment = sub.add_parser("experiment", help="run the reference experiment")
    experiment.add_argument("--n", type=int, default=16)
    experiment.add_argument("--sigma", type=float, default=1.0)
    experiment.add_argument("--steps", type=int, default=10_000_000)
    experiment.add_argument("--seed", type=int, default=DEFAULT_EXPERIMENT_SEED)
    experiment.add_argument("--burn-in", type=int, default=10_000)
    experiment.add_argument("--thin", type=int, default=10)
    experiment.add_argument("--out", required=True, help="bundle directory")
    return parser


def _cmd_gen(args) -> int:
    constraints = gen_gaussian_constraints(args.n, args.c, args.sigma, args.seed)
    manifest = {
        "tool": "polycent",
        "version": __version__,
        "n": args.n,
        "c": args.c,
        "sigma": args.sigma,
        "seed": args.seed,
    }
    write_constraints(constraints, args.out, manifest=manifest)
    return EXIT_OK


def _constraint_residuals(constraints, values: np.ndarray) -> list[float]:
    if constraints.n_constraints == 0:
        return []
    return (constraints.coefficients @ values - 1.0).tolist()


def _cmd_solve(args) -> int:
    constraints = read_constraints(args.infile)
    opts = SolverOptions(max_iterations=args.max_iter, residual_tolerance=args.tol)
    meta: dict = {
        "method": args.method,
        "input": str(args.infile),
        "tool": "polycent",
        "version": __version__,
    }
    if args.method in ("c1", "c2"):
        sp = solve_saddle(constraints, opts)
        meta["m_star"] = sp.m_star
        meta["lambda_star"] = sp.lambda_star.tolist()
        meta["residual_norm"] = sp.residual_norm
        meta["iterations"] = sp.iterations
        if args.method == "c1":
            result = centroid_first_order(constraints, sp).values
        else:
            result = centroid_second_order(constraints, sp).values
            meta["constraint_residuals"] = _constraint_residuals(constraints, result)
        meta["normalization_residual"] = float(result.sum() - 1.0)
    elif args.method == "maxent":
        solution = solve_maxent(constraints, opts)
        result = solution.distribution.values
        meta["multipliers"] = solution.multipliers.tolist()
        meta["log_norm"] = solution.log_norm
        meta["entropy"] = solution.entropy
        meta["constraint_residuals"] = _constraint_residuals(constraints, result)
    else:
        result = leading_order_estimate(constraints)
        meta["note"] = "leading-order asymptotic form; may lie outside the simplex"
        meta["min_component"] = float(result.min())
    write_distribution(result, args.out)
    meta_path = args.meta or str(args.out) + ".meta.json"
    _atomic_write_text(meta_path, json.dumps(meta, indent=2) + "\n")
    return EXIT_OK


def _cmd_sample(args) -> int:
    constraints = read_constraints(args.infile)
    chartdata = chart(constraints)
    stats = hit_and_run(
        chartdata, args.steps, args.seed, burn_in=args.burn_in, thinning=args.thin
    )
    manifest = {
        "tool": "polycent",
        "version": __version__,
        "input": str(args.infile),
        "steps": args.steps,
    }
    write_stats(stats, args.out, manifest=manifest)
    return EXIT_OK


def _cmd_compare(args) -> int:
    first = read_distribution(args.first)
    second = read_distribution(args.second)
    width_scale = None
    if args.stats is not None:
        stats = read_stats(args.stats)
        width_scale = np.sqrt(variance_estimates(stats))
    report = compare_distributions(first, second, width_scale)
    payload = report.to_dict()
    payload["manifest"] = {
        "tool": "polycent",
        "version": __version__,
        "first": str(args.first),
        "second": str(args.second),
        "stats": None if args.stats is None else str(args.stats),
    }
    _atomic_write_text(args.out, json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def _cmd_experiment(args) -> int:
    result = run_figure1(
        n=args.n,
        sigma_f=args.sigma,
        walk_steps=args.steps,
        seed=args.seed,
        burn_in=args.burn_in,
        thinning=args.thin,
    )
    write_figure1_bundle(result, Path(args.out))
    return EXIT_OK


_DISPATCH = {
    "gen": _cmd_gen,
    "solve": _cmd_solve,
    "sample": _cmd_sample,
    "compare": _cmd_compare,
    "experiment": _cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (FileFormatError, PolycentError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
