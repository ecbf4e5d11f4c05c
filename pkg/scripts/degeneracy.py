"""How often pivoting cycles on degenerate problems with and without the zero clamp."""

import argparse
import sys
from pathlib import Path

from bppnnls.errors import IterationLimit
from bppnnls.nnls import SolverOptions, bpp_solve

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from conftest import degenerate_problem  # noqa: E402


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=200)
    args = ap.parse_args()
    for tol in (1e-12, 0.0):
        limits = 0
        for s in range(args.seeds):
            P, _ = degenerate_problem(s)
            try:
                bpp_solve(P, SolverOptions(zero_tolerance=tol))
            except IterationLimit:
                limits += 1
        print(f"zero_tolerance={tol:g}: {limits}/{args.seeds} hit the iteration limit")


if __name__ == "__main__":
    main()
