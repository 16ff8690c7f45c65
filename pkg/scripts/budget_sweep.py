"""Characteristic time and empirical stopping time across smoothness budgets.

Writes one CSV row per budget on the three-arm instance (0.9, 0.5, 0.6) with
an edge between arms 2 and 3.

    python scripts/budget_sweep.py --runs 20 --out sweep.csv
"""

from __future__ import annotations

import argparse
import csv
import logging
import math

import numpy as np

from spectral_bai import RunConfig, WeightedGraph, sweep_R, vanilla_allocation

MU = [0.9, 0.5, 0.6]
EDGE = WeightedGraph(3, ((1, 2, 1.0),))


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--r-min", type=float, default=0.01)
    p.add_argument("--r-max", type=float, default=0.1)
    p.add_argument("--points", type=int, default=10)
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="sweep.csv")
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    R_values = np.linspace(args.r_min, args.r_max, args.points)
    res = sweep_R(RunConfig(MU, EDGE, args.r_max, args.delta, seed=args.seed), R_values, args.runs, jobs=args.jobs)
    t_inf = vanilla_allocation(MU).t_star
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["R", "t_star_theory", "t_star_unconstrained", "empirical_mean", "empirical_std", "sem", "error_rate"])
        for k, R in enumerate(res.R_values):
            sem = res.empirical_std[k] / math.sqrt(res.n_runs)
            w.writerow([R, res.t_star_theory[k], t_inf, res.empirical_mean[k], res.empirical_std[k], sem, res.error_rates[k]])
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
