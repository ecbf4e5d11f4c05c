"""Command-line front end.

    bppnnls solve --matrix A.mtx --rhs b.vec [--mode normal|lsqr|adaptive] ...
    bppnnls gen   --family p|sparse --m M --n N ... --out-prefix PFX
    bppnnls sweep --m 80 --n 70 --dup 4 --cond-min 1e1 --cond-max 1e8 ...

Exit codes: 0 success, 2 bad input (flags, parse or I/O errors), 3 iteration
limit, 4 dimension mismatch.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import io
from .errors import (
    DimensionMismatch,
    IterationLimit,
    NotPositiveDefinite,
    ParseError,
    SpecInvalid,
)
from .gen import GeneratorSpec, gen_p, gen_random_sparse
from .nnls import Mode, Problem, SolverOptions, bpp_solve

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_ITERATION_LIMIT = 3
EXIT_DIMENSION = 4

SWEEP_HEADER = ["cond", "rel_err_normal", "rel_err_lsqr", "pivots", "seed"]


@dataclass
class SweepRow:
    cond: float
    rel_err_normal: float | None  # None: normal equations broke down
    rel_err_lsqr: float | None
    pivots: int
    seed: int

    def as_csv(self) -> list[str]:
        def fmt(v):
            return "" if v is None else repr(float(v))

        return [repr(float(self.cond)), fmt(self.rel_err_normal), fmt(self.rel_err_lsqr),
                str(self.pivots), str(self.seed)]


def _rel_err(x, x_true) -> float:
    return float(np.linalg.norm(x - x_true) / np.linalg.norm(x_true))


def sweep_conds(cond_min: float, cond_max: float, points: int) -> np.ndarray:
    if points == 1:
        return np.array([float(cond_min)])
    return np.geomspace(cond_min, cond_max, points)


def run_sweep(
    m: int = 80,
    n: int = 70,
    dup: int = 4,
    conds=(10.0,),
    seeds_per_point: int = 1,
    base_seed: int = 0,
    residual_ratio: float = 0.01,
) -> list[SweepRow]:
    """Relative error of the normal-equations-only and LSQR-final solvers on P problems.

    Normal-equations breakdowns (and pivoting failures) leave the error empty
    instead of stopping the sweep.
    """
    normal = SolverOptions(mode=Mode.NormalEquationsOnly, lsqr_fallback=False)
    final = SolverOptions(mode=Mode.LsqrFinal)
    rows = []
    for i, cond in enumerate(sorted(conds)):
        for j in range(seeds_per_point):
            seed = base_seed + i * seeds_per_point + j
            g = gen_p(GeneratorSpec(m, n, dup, float(cond), seed, residual_ratio=residual_ratio))
            err_n = err_l = None
            pivots = 0
            try:
                res = bpp_solve(g.problem, normal)
                err_n = _rel_err(res.x, g.x_true)
                pivots = res.pivot_iterations
            except (NotPositiveDefinite, IterationLimit):
                pass
            try:
                res = bpp_solve(g.problem, final)
                err_l = _rel_err(res.x, g.x_true)
                pivots = res.pivot_iterations
            except IterationLimit:
                pass
            rows.append(SweepRow(float(cond), err_n, err_l, pivots, seed))
    return rows


def _fail(msg: str, code: int) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def cmd_solve(args) -> int:
    try:
        A = io.read_matrix_market(args.matrix)
        b = io.read_vector(args.rhs)
    except (ParseError, OSError) as e:
        return _fail(str(e), EXIT_INPUT)
    opts = SolverOptions(
        zero_tolerance=args.zero_tol,
        max_iterations=args.max_iter,
        mode=Mode(args.mode),
    )
    try:
        problem = Problem(A, b)
        result = bpp_solve(problem, opts)
    except DimensionMismatch as e:
        return _fail(str(e), EXIT_DIMENSION)
    except IterationLimit as e:
        return _fail(str(e), EXIT_ITERATION_LIMIT)

    if args.out:
        try:
            io.write_vector(args.out, result.x)
        except OSError as e:
            return _fail(str(e), EXIT_INPUT)
        report_to = sys.stdout
    else:
        sys.stdout.write(io.format_vector(result.x))
        report_to = sys.stderr
    if args.report:
        k = result.kkt
        kappa = result.condition.kappa if result.condition else math.nan
        print(f"objective            {result.objective:.17g}", file=report_to)
        print(f"min_x                {k.min_x:.6e}", file=report_to)
        print(f"min_y                {k.min_y:.6e}", file=report_to)
        print(f"max_complementarity  {k.max_complementarity:.6e}", file=report_to)
        print(f"condition_estimate   {kappa:.6e}", file=report_to)
        print(f"pivots               {result.pivot_iterations}", file=report_to)
        print(f"refined_with_lsqr    {result.refined_with_lsqr}", file=report_to)
    return EXIT_OK


def cmd_gen(args) -> int:
    spec = GeneratorSpec(
        m=args.m,
        n=args.n,
        d=args.dup,
        cond_target=args.cond,
        seed=args.seed,
        density=args.density,
        residual_ratio=args.residual_ratio,
    )
    try:
        g = gen_p(spec) if args.family == "p" else gen_random_sparse(spec)
    except SpecInvalid as e:
        return _fail(str(e), EXIT_INPUT)
    try:
        io.write_matrix_market(f"{args.out_prefix}.mtx", g.problem.A)
        io.write_vector(f"{args.out_prefix}_b.vec", g.problem.b)
        if g.has_x_true:
            io.write_vector(f"{args.out_prefix}_xtrue.vec", g.x_true)
    except OSError as e:
        return _fail(str(e), EXIT_INPUT)
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.points < 1 or args.seeds_per_point < 1:
        return _fail("--points and --seeds-per-point must be at least 1", EXIT_INPUT)
    if not (1.0 <= args.cond_min <= args.cond_max):
        return _fail("need 1 <= --cond-min <= --cond-max", EXIT_INPUT)
    try:
        rows = run_sweep(
            args.m,
            args.n,
            args.dup,
            sweep_conds(args.cond_min, args.cond_max, args.points),
            args.seeds_per_point,
            args.seed,
            args.residual_ratio,
        )
    except SpecInvalid as e:
        return _fail(str(e), EXIT_INPUT)
    try:
        out = open(args.out, "w", newline="") if args.out else sys.stdout
    except OSError as e:
        return _fail(str(e), EXIT_INPUT)
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for row in rows:
            w.writerow(row.as_csv())
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bppnnls", description="Sparse nonnegative least squares by block principal pivoting."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve min ||Ax-b|| s.t. x >= 0 from files")
    p.add_argument("--matrix", required=True, help="Matrix Market file holding A")
    p.add_argument("--rhs", required=True, help="vector file holding b")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.LsqrFinal.value)
    p.add_argument("--zero-tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--out", help="write x here instead of standard output")
    p.add_argument("--report", action="store_true", help="print a KKT report")
    p.set_defaults(func=cmd_solve)

    g = sub.add_parser("gen", help="write a generated problem to files")
    g.add_argument("--family", choices=["p", "sparse"], default="p")
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--dup", type=int, default=1)
    g.add_argument("--cond", type=float, default=1.0)
    g.add_argument("--density", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--residual-ratio", type=float, default=0.01)
    g.add_argument("--out-prefix", required=True)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("sweep", help="error vs condition number on P problems (CSV)")
    s.add_argument("--m", type=int, default=80)
    s.add_argument("--n", type=int, default=70)
    s.add_argument("--dup", type=int, default=4)
    s.add_argument("--cond-min", type=float, default=1e1)
    s.add_argument("--cond-max", type=float, default=1e8)
    s.add_argument("--points", type=int, default=8)
    s.add_argument("--seeds-per-point", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--residual-ratio", type=float, default=0.01)
    s.add_argument("--out", help="CSV path (standard output if omitted)")
    s.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
