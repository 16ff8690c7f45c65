"""Monte-Carlo harness for SpectralTaS on Gaussian bandits."""

from __future__ import annotations

import logging
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .allocation import DEFAULT_INNER_ITERS, DEFAULT_ITERS, _mirror_ascent_weights, allocate
from .core import (
    BanditInstance,
    SmoothnessBudget,
    WeightedGraph,
    best_arm,
    best_arm_lowest,
    laplacian_from_graph,
    smoothness,
)
from .tracking import TrackerState, epsilon_schedule, project_simplex_inf, sample_rule, stopping_rule

log = logging.getLogger(__name__)

DEFAULT_MAX_STEPS = 1_000_000


class MisspecifiedBudget(UserWarning):
    """The true means violate the smoothness budget given to the algorithm."""


@dataclass(frozen=True)
class RunConfig:
    mu: BanditInstance
    graph: WeightedGraph
    R: SmoothnessBudget = field(default_factory=SmoothnessBudget)
    delta: float = 0.1
    seed: int = 0
    inner_iters: int = DEFAULT_INNER_ITERS
    max_steps: int = DEFAULT_MAX_STEPS
    warm_start: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.mu, BanditInstance):
            object.__setattr__(self, "mu", BanditInstance(self.mu))
        object.__setattr__(self, "R", SmoothnessBudget.parse(self.R))
        if self.graph.K != self.mu.K:
            raise ValueError(f"graph has {self.graph.K} nodes but there are {self.mu.K} arms")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must be in (0, 1)")
        if self.max_steps < self.mu.K:
            raise ValueError("max_steps must be at least the number of arms")
        if self.inner_iters < 1:
            raise ValueError("inner_iters must be >= 1")

    @property
    def K(self) -> int:
        return self.mu.K


@dataclass(frozen=True)
class RunRecord:
    tau: int
    recommended: int
    correct: bool
    pull_counts: tuple[int, ...]
    wall_time: float
    truncated: bool
    seed: int = 0


@dataclass(frozen=True)
class BatchResult:
    records: tuple[RunRecord, ...]
    mean: float
    std: float
    error_rate: float
    n_truncated: int

    @property
    def n_runs(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class SweepResult:
    R_values: list[float]
    t_star_theory: list[float]
    empirical_mean: list[float]
    empirical_std: list[float]
    n_runs: int
    delta: float
    sup_gap_bounds: list[float] = field(default_factory=list)
    error_rates: list[float] = field(default_factory=list)

    def theory_nondecreasing(self, slack: Optional[Sequence[float]] = None) -> bool:
        """True when each theory value is at most the next one plus ``slack``."""
        t = self.t_star_theory
        s = [0.0] * len(t) if slack is None else list(slack)
        return all(t[k] <= t[k + 1] + s[k] for k in range(len(t) - 1))


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based stream keyed by the seed, so runs never share state."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed) % 2**64)))


def run_once(cfg: RunConfig) -> RunRecord:
    """One SpectralTaS trajectory; fully determined by ``cfg``."""
    start = time.perf_counter()
    mu = cfg.mu.means
    K = cfg.K
    lap = laplacian_from_graph(cfg.graph).matrix
    R = cfg.R.R
    if not cfg.R.unbounded and smoothness(mu, lap) > R:
        warnings.warn(
            f"true smoothness {smoothness(mu, lap):.6g} exceeds R={R:g}; guarantees do not apply",
            MisspecifiedBudget,
            stacklevel=2,
        )
    rng = make_rng(cfg.seed)
    state = TrackerState(K)
    for a in range(K):
        state.record(a, rng.normal(mu[a], 1.0))

    omega_prev: Optional[np.ndarray] = None
    truncated = False
    while True:
        decision = stopping_rule(state, cfg.delta)
        if decision.stopped:
            break
        if state.t >= cfg.max_steps:
            truncated = True
            break
        mu_hat = state.sums / state.pull_counts
        a_hat = best_arm_lowest(mu_hat)
        omega = _mirror_ascent_weights(
            mu_hat, lap, R, a_hat, cfg.inner_iters, omega0=omega_prev if cfg.warm_start else None
        )
        omega_prev = omega
        omega_eps = project_simplex_inf(omega / omega.sum(), epsilon_schedule(state.t, K))
        arm = sample_rule(state, omega_eps)
        state.record(arm, rng.normal(mu[arm], 1.0))

    recommended = best_arm_lowest(state.sums / state.pull_counts)
    return RunRecord(
        tau=int(state.t),
        recommended=recommended,
        correct=recommended == best_arm(mu),
        pull_counts=tuple(int(n) for n in state.pull_counts),
        wall_time=time.perf_counter() - start,
        truncated=truncated,
        seed=int(cfg.seed),
    )


def summarize(records: Sequence[RunRecord]) -> BatchResult:
    taus = np.array([r.tau for r in records if not r.truncated], dtype=float)
    mean = float(taus.mean()) if taus.size else math.nan
    std = float(taus.std(ddof=1)) if taus.size > 1 else 0.0 if taus.size else math.nan
    errors = sum(not r.correct for r in records)
    return BatchResult(
        records=tuple(records),
        mean=mean,
        std=std,
        error_rate=errors / len(records),
        n_truncated=sum(r.truncated for r in records),
    )


def run_batch(cfg: RunConfig, n_runs: int, jobs: int = 1) -> BatchResult:
    """Run ``n_runs`` independent trajectories with seeds ``cfg.seed + index``."""
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    cfgs = [replace(cfg, seed=cfg.seed + k) for k in range(n_runs)]
    if jobs > 1 and n_runs > 1:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", MisspecifiedBudget)
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                records = list(pool.map(run_once, cfgs))
    else:
        records = []
        for k, c in enumerate(cfgs):
            with warnings.catch_warnings():
                if k:
                    warnings.simplefilter("ignore", MisspecifiedBudget)
                records.append(run_once(c))
            log.debug("run %d/%d: tau=%d", k + 1, n_runs, records[-1].tau)
    return summarize(records)


def sweep_R(
    cfg_base: RunConfig,
    R_values: Sequence[float],
    n_runs: int,
    *,
    theory_iters: int = DEFAULT_ITERS,
    jobs: int = 1,
) -> SweepResult:
    """Theory curve and empirical stopping times over a range of budgets.

    Every budget uses the same seeds, so differences between budgets are not
    blurred by independent sampling noise.
    """
    if len(R_values) == 0:
        raise ValueError("R_values must be nonempty")
    lap = laplacian_from_graph(cfg_base.graph)
    true_smooth = smoothness(cfg_base.mu, lap)
    out = SweepResult([], [], [], [], n_runs, cfg_base.delta)
    for R in R_values:
        budget = SmoothnessBudget.parse(R)
        if not budget.unbounded and budget.R < true_smooth:
            log.warning("R=%g is below the true smoothness %g", budget.R, true_smooth)
        theory = allocate(cfg_base.mu, lap, budget, theory_iters)
        batch = run_batch(replace(cfg_base, R=budget), n_runs, jobs=jobs)
        out.R_values.append(budget.R)
        out.t_star_theory.append(theory.t_star)
        out.sup_gap_bounds.append(theory.sup_gap_bound)
        out.empirical_mean.append(batch.mean)
        out.empirical_std.append(batch.std)
        out.error_rates.append(batch.error_rate)
        log.info("R=%g  T*=%.4f  tau=%.1f +- %.1f", budget.R, theory.t_star, batch.mean, batch.std)
    return out
