"""Command-line interface: ``spectral-bai {allocate,oracle,run,sweep}``.

Arms are numbered from 1 in problem files and in every report.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from .allocation import DEFAULT_INNER_ITERS, DEFAULT_ITERS, allocate, lower_bound
from .core import BanditInstance, SimplexWeights, SmoothnessBudget, WeightedGraph, laplacian_from_graph, smoothness
from .errors import BracketFailure, SingularSystem
from .oracle import best_response
from .simulator import DEFAULT_MAX_STEPS, MisspecifiedBudget, RunConfig, run_batch, sweep_R

log = logging.getLogger("spectral_bai")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_SOLVER = 2
EXIT_TRUNCATED = 3

SEED_ENV = "SPECTRAL_BAI_SEED"

RUNS_COLUMNS = ["run", "seed", "tau", "recommended", "correct", "truncated", "wall_time"]
SWEEP_COLUMNS = ["R", "t_star_theory", "empirical_mean", "empirical_std", "n_runs"]

_TOP_KEYS = {"means", "edges", "R", "delta", "seed", "solver"}
_SOLVER_KEYS = {"iters", "inner_iters", "max_steps"}


class InputError(ValueError):
    """Malformed problem file or command-line value."""


@dataclass(frozen=True)
class SolverOptions:
    iters: int = DEFAULT_ITERS
    inner_iters: int = DEFAULT_INNER_ITERS
    max_steps: int = DEFAULT_MAX_STEPS


@dataclass(frozen=True)
class ProblemSpec:
    mu: BanditInstance
    graph: WeightedGraph
    R: SmoothnessBudget
    delta: float = 0.1
    seed: int = 0
    solver: SolverOptions = field(default_factory=SolverOptions)

    @property
    def laplacian(self):
        return laplacian_from_graph(self.graph)

    def run_config(self) -> RunConfig:
        return RunConfig(
            self.mu,
            self.graph,
            self.R,
            self.delta,
            self.seed,
            inner_iters=self.solver.inner_iters,
            max_steps=self.solver.max_steps,
        )


def _int(value: Any, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InputError(f"{name} must be an integer, got {value!r}")
    return value


def _real(value: Any, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputError(f"{name} must be a number, got {value!r}")
    return float(value)


def parse_spec(data: Any, *, env: Optional[dict] = None) -> ProblemSpec:
    """Validate a decoded problem file. ``env`` defaults to ``os.environ``."""
    env = os.environ if env is None else env
    if not isinstance(data, dict):
        raise InputError("problem file must hold a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise InputError(f"unknown keys: {sorted(unknown)}")
    if "means" not in data:
        raise InputError("missing required key 'means'")
    means = data["means"]
    if not isinstance(means, list):
        raise InputError("'means' must be a list of numbers")
    mu = BanditInstance([_real(m, "mean") for m in means])
    edges = data.get("edges", [])
    if not isinstance(edges, list) or not all(isinstance(e, list) for e in edges):
        raise InputError("'edges' must be a list of [a, b, weight] triples")
    for e in edges:
        if len(e) != 3:
            raise InputError(f"edge must be [a, b, weight], got {e!r}")
        _int(e[0], "edge endpoint")
        _int(e[1], "edge endpoint")
        _real(e[2], "edge weight")
    graph = WeightedGraph.from_one_based(mu.K, edges)
    R_raw = data.get("R", "inf")
    if isinstance(R_raw, str):
        if R_raw.strip().lower() != "inf":
            raise InputError(f"R must be a number or \"inf\", got {R_raw!r}")
        R = SmoothnessBudget.parse(R_raw)
    else:
        R = SmoothnessBudget(_real(R_raw, "R"))
    delta = _real(data.get("delta", 0.1), "delta")
    if not 0.0 < delta < 1.0:
        raise InputError(f"delta must lie in (0, 1), got {delta}")
    seed = _int(data.get("seed", 0), "seed")
    if env.get(SEED_ENV):
        try:
            seed = int(env[SEED_ENV])
        except ValueError:
            raise InputError(f"{SEED_ENV} must be an integer, got {env[SEED_ENV]!r}") from None
    solver_raw = data.get("solver", {})
    if not isinstance(solver_raw, dict):
        raise InputError("'solver' must be an object")
    unknown = set(solver_raw) - _SOLVER_KEYS
    if unknown:
        raise InputError(f"unknown solver keys: {sorted(unknown)}")
    opts = {k: _int(v, k) for k, v in solver_raw.items()}
    if any(v < 1 for v in opts.values()):
        raise InputError("solver options must be positive")
    return ProblemSpec(mu, graph, R, delta, seed, SolverOptions(**opts))


def load_spec(path: "str | Path") -> ProblemSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    return parse_spec(data)


def fmt(x: float) -> "float | str | None":
    """Round to 12 significant digits; infinities become strings so the JSON stays valid."""
    if x is None:
        return None
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(f"{x:.12g}")


def _fmt_csv(x: float) -> str:
    x = float(x)
    return "inf" if math.isinf(x) else ("nan" if math.isnan(x) else f"{x:.12g}")


def _vec(v: Sequence[float]) -> list:
    return [fmt(x) for x in v]


def _emit(obj: dict, out: Optional[Path] = None) -> None:
    text = json.dumps(obj, indent=2)
    if out is not None:
        out.write_text(text + "\n")
    print(text)


def _warn_budget(spec: ProblemSpec, R: SmoothnessBudget) -> None:
    s = smoothness(spec.mu, spec.laplacian)
    if not R.unbounded and R.R < s:
        log.warning("R=%g is below the smoothness of the means (%.12g); the budget is misspecified", R.R, s)


def _parse_floats(text: str, name: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"{name} must be a comma-separated list of numbers, got {text!r}") from None
    if not vals:
        raise InputError(f"{name} is empty")
    return vals


def cmd_allocate(args: argparse.Namespace) -> int:
    spec = load_spec(args.spec)
    _warn_budget(spec, spec.R)
    iters = args.iters if args.iters is not None else spec.solver.iters
    res = allocate(spec.mu, spec.laplacian, spec.R, iters)
    _emit(
        {
            "omega_star": _vec(res.weights),
            "t_star": fmt(res.t_star),
            "t_star_inverse": fmt(res.value),
            "sup_gap_bound": fmt(res.sup_gap_bound),
            "method": res.method,
            "iterations": res.iterations,
            "delta": fmt(spec.delta),
            "lower_bound": fmt(lower_bound(res.t_star, spec.delta)),
            "R": fmt(spec.R.R),
            "smoothness": fmt(smoothness(spec.mu, spec.laplacian)),
        }
    )
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    spec = load_spec(args.spec)
    _warn_budget(spec, spec.R)
    w = _parse_floats(args.omega, "--omega")
    if len(w) != spec.mu.K:
        raise InputError(f"--omega has {len(w)} entries but there are {spec.mu.K} arms")
    omega = SimplexWeights(np.array(w))
    br = best_response(spec.mu, omega, spec.laplacian, spec.R)
    _emit(
        {
            "lambda": _vec(br.lam),
            "alt_arm": br.alt_arm + 1,
            "value": fmt(br.value),
            "divergences": _vec(br.divergences),
            "saturated": br.saturated,
            "gamma": fmt(br.gamma),
            "smoothness": fmt(br.smoothness(spec.laplacian)),
        }
    )
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    spec = load_spec(args.spec)
    _warn_budget(spec, spec.R)
    if args.runs < 1:
        raise InputError("--runs must be >= 1")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MisspecifiedBudget)
        batch = run_batch(spec.run_config(), args.runs, jobs=args.jobs)
    K = spec.mu.K
    with open(out / "runs.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(RUNS_COLUMNS + [f"pulls_{a + 1}" for a in range(K)])
        for k, r in enumerate(batch.records):
            wr.writerow(
                [k + 1, r.seed, r.tau, r.recommended + 1, int(r.correct), int(r.truncated), _fmt_csv(r.wall_time)]
                + list(r.pull_counts)
            )
    _emit(
        {
            "n_runs": batch.n_runs,
            "mean_tau": fmt(batch.mean),
            "std_tau": fmt(batch.std),
            "error_rate": fmt(batch.error_rate),
            "n_truncated": batch.n_truncated,
            "delta": fmt(spec.delta),
            "R": fmt(spec.R.R),
            "seed": spec.seed,
            "inner_iters": spec.solver.inner_iters,
        },
        out / "summary.json",
    )
    return EXIT_TRUNCATED if batch.n_truncated else EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    spec = load_spec(args.spec)
    R_values = _parse_floats(args.r_values, "--r-values")
    budgets = [SmoothnessBudget(R) for R in R_values]
    if args.runs < 1:
        raise InputError("--runs must be >= 1")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    iters = args.iters if args.iters is not None else spec.solver.iters
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MisspecifiedBudget)
        res = sweep_R(spec.run_config(), [b.R for b in budgets], args.runs, theory_iters=iters, jobs=args.jobs)
    with open(out / "sweep.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(SWEEP_COLUMNS)
        for k in range(len(res.R_values)):
            wr.writerow(
                [
                    _fmt_csv(res.R_values[k]),
                    _fmt_csv(res.t_star_theory[k]),
                    _fmt_csv(res.empirical_mean[k]),
                    _fmt_csv(res.empirical_std[k]),
                    res.n_runs,
                ]
            )
    _emit(
        {
            "R_values": _vec(res.R_values),
            "t_star_theory": _vec(res.t_star_theory),
            "empirical_mean": _vec(res.empirical_mean),
            "empirical_std": _vec(res.empirical_std),
            "error_rates": _vec(res.error_rates),
            "sup_gap_bounds": _vec(res.sup_gap_bounds),
            "n_runs": res.n_runs,
            "delta": fmt(res.delta),
            "seed": spec.seed,
        },
        out / "sweep.json",
    )
    return EXIT_OK


EPILOG = f"""\
problem file (JSON, arms numbered from 1):
  {{"means": [0.9, 0.5, 0.6], "edges": [[2, 3, 1.0]], "R": 0.01,
   "delta": 0.1, "seed": 0,
   "solver": {{"iters": {DEFAULT_ITERS}, "inner_iters": {DEFAULT_INNER_ITERS}, "max_steps": {DEFAULT_MAX_STEPS}}}}}
  Only "means" is required. R may be "inf". Unknown keys are rejected.
  {SEED_ENV} overrides "seed".

outputs:
  allocate, oracle   JSON report on stdout
  run                DIR/runs.csv, DIR/summary.json (also printed)
                     runs.csv columns: {", ".join(RUNS_COLUMNS)}, pulls_1..pulls_K
                     (recommended is 1-based; correct/truncated are 0/1)
  sweep              DIR/sweep.csv, DIR/sweep.json (also printed)
                     sweep.csv columns: {", ".join(SWEEP_COLUMNS)}
  Floats carry 12 significant digits.

exit codes: 0 ok, 1 input error, 2 solver failure, 3 truncated runs present
"""


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="spectral-bai",
        description="Optimal allocations and track-and-stop simulations for graph-smooth Gaussian bandits.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("allocate", help="optimal allocation and characteristic time")
    a.add_argument("--spec", required=True, help="problem file")
    a.add_argument("--iters", type=int, help="mirror-ascent iterations (finite R only)")
    a.set_defaults(func=cmd_allocate)

    o = sub.add_parser("oracle", help="best response to a given allocation")
    o.add_argument("--spec", required=True, help="problem file")
    o.add_argument("--omega", required=True, help="allocation w1,w2,... summing to 1")
    o.set_defaults(func=cmd_oracle)

    r = sub.add_parser("run", help="simulate independent track-and-stop runs")
    r.add_argument("--spec", required=True, help="problem file")
    r.add_argument("--runs", type=int, required=True, help="number of runs (seeds seed, seed+1, ...)")
    r.add_argument("--jobs", type=int, default=1, help="worker processes")
    r.add_argument("--out", required=True, help="output directory")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="theory and simulation over several budgets")
    s.add_argument("--spec", required=True, help="problem file (its R is ignored)")
    s.add_argument("--r-values", required=True, help="budgets r1,r2,... (inf allowed)")
    s.add_argument("--runs", type=int, required=True, help="runs per budget")
    s.add_argument("--jobs", type=int, default=1, help="worker processes")
    s.add_argument("--iters", type=int, help="mirror-ascent iterations for the theory curve")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(level)
    log.propagate = False
    try:
        return args.func(args)
    except (SingularSystem, BracketFailure) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    finally:
        log.removeHandler(handler)
        log.propagate = True


if __name__ == "__main__":
    sys.exit(main())
