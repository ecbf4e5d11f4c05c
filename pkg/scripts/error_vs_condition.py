"""Relative error of the two solver modes against cond(A) on P problems.

Writes the sweep CSV and, if matplotlib is available, a log-log plot with the
reference line 0.1 * cond^2 * eps.

    python3 scripts/error_vs_condition.py --out results/sweep.csv
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from bppnnls.cli import SWEEP_HEADER, run_sweep, sweep_conds

EPS = 2.0**-52


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--m", type=int, default=80)
    ap.add_argument("--n", type=int, default=70)
    ap.add_argument("--dup", type=int, default=4)
    ap.add_argument("--points", type=int, default=13)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--residual-ratio", type=float, default=0.01)
    ap.add_argument("--out", type=Path, default=Path("results/sweep.csv"))
    args = ap.parse_args()

    conds = sweep_conds(1e1, 1e7, args.points)
    rows = run_sweep(args.m, args.n, args.dup, conds, args.seeds, 0, args.residual_ratio)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        w.writerows(r.as_csv() for r in rows)

    print(f"{'cond':>8} {'normal/k2e':>11} {'lsqr/k2e':>11}")
    for c in conds:
        sel = [r for r in rows if r.cond == c]
        norm = np.median([r.rel_err_normal if r.rel_err_normal is not None else np.inf for r in sel])
        lsq = np.median([r.rel_err_lsqr if r.rel_err_lsqr is not None else np.inf for r in sel])
        k2e = c * c * EPS
        print(f"{c:8.1e} {norm / k2e:11.3g} {lsq / k2e:11.3g}")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog([r.cond for r in rows], [r.rel_err_normal or np.nan for r in rows], "o",
              label="normal equations")
    ax.loglog([r.cond for r in rows], [r.rel_err_lsqr or np.nan for r in rows], "^",
              label="LSQR final step")
    ax.loglog(conds, 0.1 * conds**2 * EPS, "k-", lw=0.8, label=r"$0.1\,\kappa^2\varepsilon$")
    ax.set_xlabel("condition number")
    ax.set_ylabel("relative error")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out.with_suffix(".png"), dpi=150)


if __name__ == "__main__":
    main()
