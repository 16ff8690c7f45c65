"""Sampling and stopping rules of the track-and-stop loop.

The sampling rule is C-tracking with forced exploration: at each step the
target allocation is pushed into ``{w >= eps_t}``, accumulated, and the arm
with the largest gap between accumulated target and actual pulls is played.
The stopping rule is the pairwise Gaussian GLR test against the threshold
``log(2 t (K - 1) / delta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import SimplexWeights


def epsilon_schedule(s: int, K: int) -> float:
    if s < 0:
        raise ValueError("step count must be >= 0")
    return 0.5 / math.sqrt(K * K + s)


def project_simplex_inf(omega: "SimplexWeights | np.ndarray", eps: float) -> SimplexWeights:
    """Project onto ``{w in [eps, 1]^K : sum(w) = 1}`` in sup-norm.

    Uses ``w_a = max(eps, omega_a - theta)`` with the common shift ``theta``
    chosen so the weights sum to one. Coordinates below ``eps`` are lifted to
    ``eps`` and the deficit is taken evenly from the largest coordinates, which
    attains the smallest possible sup-distance. The result is also the
    Euclidean projection.
    """
    w = omega.weights if isinstance(omega, SimplexWeights) else np.asarray(omega, dtype=float)
    K = w.size
    if not (0.0 < eps <= 1.0 / K + 1e-15):
        raise ValueError(f"eps must lie in (0, 1/K] = (0, {1.0 / K}], got {eps}")
    if w.min() >= eps:
        return omega if isinstance(omega, SimplexWeights) else SimplexWeights(w)
    if eps >= 1.0 / K:
        return SimplexWeights(np.full(K, 1.0 / K))
    # sum_a max(eps, w_a - theta) = 1 is piecewise linear and decreasing in theta;
    # scan the breakpoints theta = w_a - eps from the top
    slack = np.sort(w - eps)[::-1]
    mass = 1.0 - K * eps  # total slack to keep above the floor
    csum = 0.0
    theta = 0.0
    for j in range(K):
        csum += slack[j]
        theta = (csum - mass) / (j + 1)
        if j + 1 == K or slack[j + 1] <= theta:
            break
    out = np.maximum(eps, w - theta)
    out[np.argmax(out)] += 1.0 - out.sum()
    return SimplexWeights(out)


@dataclass
class TrackerState:
    """Mutable per-run state. ``t`` counts all pulls including the initial round."""

    K: int
    t: int = 0
    pull_counts: np.ndarray = field(default=None)  # type: ignore[assignment]
    sums: np.ndarray = field(default=None)  # type: ignore[assignment]
    cumulative_weights: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.pull_counts is None:
            self.pull_counts = np.zeros(self.K, dtype=np.int64)
        if self.sums is None:
            self.sums = np.zeros(self.K)
        if self.cumulative_weights is None:
            self.cumulative_weights = np.zeros(self.K)

    @property
    def mu_hat(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.pull_counts > 0, self.sums / self.pull_counts, np.nan)

    def record(self, arm: int, reward: float) -> None:
        self.pull_counts[arm] += 1
        self.sums[arm] += reward
        self.t += 1

    @property
    def deficits(self) -> np.ndarray:
        return self.cumulative_weights - self.pull_counts


@dataclass(frozen=True)
class StoppingDecision:
    stopped: bool
    statistic: float
    threshold: float
    candidate: int


def sample_rule(state: TrackerState, omega_eps: "SimplexWeights | np.ndarray") -> int:
    """Accumulate ``omega_eps`` and return the arm with the largest deficit (lowest index on ties)."""
    w = omega_eps.weights if isinstance(omega_eps, SimplexWeights) else np.asarray(omega_eps, dtype=float)
    state.cumulative_weights += w
    return int(np.argmax(state.deficits))


def glr_statistic(state: TrackerState, a: int, b: int) -> float:
    """Signed GLR statistic for ``mu_a > mu_b`` using the pooled mean of the two arms."""
    na, nb = state.pull_counts[a], state.pull_counts[b]
    if na <= 0 or nb <= 0:
        raise ValueError(f"GLR needs both arms pulled, got N_{a}={na}, N_{b}={nb}")
    ma, mb = state.sums[a] / na, state.sums[b] / nb
    pooled = (na * ma + nb * mb) / (na + nb)
    mag = (na * (ma - pooled) ** 2 + nb * (mb - pooled) ** 2) / 2.0
    return float(np.sign(ma - mb) * mag)


def glr_matrix(pull_counts: np.ndarray, mu_hat: np.ndarray) -> np.ndarray:
    """All pairwise statistics ``Z[a, b]``, same formula as :func:`glr_statistic`."""
    n = np.asarray(pull_counts, dtype=float)
    m = np.asarray(mu_hat, dtype=float)
    na, nb = n[:, None], n[None, :]
    ma, mb = m[:, None], m[None, :]
    pooled = (na * ma + nb * mb) / (na + nb)
    mag = (na * (ma - pooled) ** 2 + nb * (mb - pooled) ** 2) / 2.0
    return np.sign(ma - mb) * mag


def stopping_threshold(t: int, K: int, delta: float) -> float:
    return math.log(2.0 * t * (K - 1) / delta)


def stopping_rule(state: TrackerState, delta: float) -> StoppingDecision:
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must be in (0, 1)")
    if np.any(state.pull_counts <= 0):
        raise ValueError("every arm must be pulled before testing")
    Z = glr_matrix(state.pull_counts, state.sums / state.pull_counts)
    np.fill_diagonal(Z, np.inf)
    per_arm = Z.min(axis=1)
    cand = int(np.argmax(per_arm))
    stat = float(per_arm[cand])
    thr = stopping_threshold(state.t, state.K, delta)
    return StoppingDecision(stat > thr, stat, thr, cand)
