"""Empirical error rate of SpectralTaS at a given confidence level.

    python scripts/delta_correctness.py --runs 200 --R 0.1 --delta 0.1
"""

from __future__ import annotations

import argparse
import math

from spectral_bai import RunConfig, WeightedGraph, allocate, laplacian_from_graph, lower_bound, run_batch

MU = [0.9, 0.5, 0.6]
EDGE = WeightedGraph(3, ((1, 2, 1.0),))


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--runs", type=int, default=200)
    p.add_argument("--R", type=float, default=0.1)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=1000)
    p.add_argument("--jobs", type=int, default=1)
    args = p.parse_args()

    res = run_batch(RunConfig(MU, EDGE, args.R, args.delta, seed=args.seed), args.runs, jobs=args.jobs)
    limit = args.delta + 3 * math.sqrt(args.delta * (1 - args.delta) / args.runs)
    theory = allocate(MU, laplacian_from_graph(EDGE), args.R)
    print(f"runs={res.n_runs} errors={round(res.error_rate * res.n_runs)} error_rate={res.error_rate:.4f} (limit {limit:.4f})")
    print(f"mean tau={res.mean:.1f} std={res.std:.1f} truncated={res.n_truncated}")
    print(f"T*_R={theory.t_star:.4f} lower bound on E[tau]={lower_bound(theory.t_star, args.delta):.1f}")


if __name__ == "__main__":
    main()
