"""Optimal allocations and the characteristic time.

``T*_R(mu)^{-1} = max_omega f(omega)`` where ``f(omega)`` is the value of the best
response to ``omega``. Without a smoothness constraint the maximiser has a closed
form (a one-parameter recursion plus a scalar root); otherwise it is computed
by entropic mirror ascent on ``f``, using the oracle's divergence vector as a
supergradient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from . import _kernels as K_
from .core import (
    BanditInstance,
    Laplacian,
    SimplexWeights,
    SmoothnessBudget,
    as_matrix,
    as_means,
    best_arm,
)
from .oracle import best_response, raise_for_status

Method = Literal["closed_form", "mirror_ascent"]

DEFAULT_ITERS = 200_000
DEFAULT_INNER_ITERS = 5_000


@dataclass(frozen=True)
class AllocationResult:
    omega_star: SimplexWeights
    t_star: float
    value: float
    iterations: int
    sup_gap_bound: float
    method: Method

    @property
    def weights(self) -> np.ndarray:
        return self.omega_star.weights


@dataclass(frozen=True)
class RecursionState:
    """Ratios ``x_a = omega_a / omega_best`` for arms sorted by decreasing mean.

    ``c`` is the ratio of the worst arm; ``x`` holds the ratios of arms
    2..K in sorted order and ``f_value = sum(x**2)`` (``inf`` when ``c`` is so
    large that no admissible ratio exists for a closer arm).
    """

    c: float
    x: np.ndarray
    f_value: float


def lipschitz_constant(mu: "BanditInstance | np.ndarray") -> float:
    """max_{i,j} k(mu_i, mu_j)."""
    m = as_means(mu)
    return float((m.max() - m.min()) ** 2 / 2.0)


def kl_bernoulli(p: float, q: float) -> float:
    if not (0.0 < p < 1.0 and 0.0 < q < 1.0):
        raise ValueError(f"kl_bernoulli needs p, q in (0, 1), got ({p}, {q})")
    return p * math.log(p / q) + (1.0 - p) * math.log((1.0 - p) / (1.0 - q))


def lower_bound(t_star: float, delta: float) -> float:
    """Expected-sample-size lower bound ``T* kl(delta, 1 - delta)`` for a delta-correct strategy."""
    return t_star * kl_bernoulli(delta, 1.0 - delta)


def recursion_state(gaps: np.ndarray, c: float) -> RecursionState:
    """Run the equalisation recursion from the worst arm back to the closest one.

    ``gaps`` are ``mu_best - mu_a`` for the suboptimal arms sorted increasingly.
    Consecutive ratios satisfy ``(1 + 1/x_{a-1}) = (1 + 1/x_a) (gap_{a-1}/gap_a)^2``,
    which is what equal values ``omega_best omega_a gap_a^2 / (2 (omega_best + omega_a))``
    across alternatives amount to.
    """
    gaps = np.asarray(gaps, dtype=float)
    n = gaps.size
    x = np.zeros(n)
    if c <= 0.0:
        return RecursionState(float(c), x, 0.0)
    x[-1] = c
    for a in range(n - 1, 0, -1):
        inv = (1.0 + 1.0 / x[a]) * (gaps[a - 1] / gaps[a]) ** 2 - 1.0
        if inv <= 0.0:
            x[: a] = np.inf
            return RecursionState(float(c), x, math.inf)
        x[a - 1] = 1.0 / inv
    return RecursionState(float(c), x, float(np.sum(x * x)))


def solve_recursion(gaps: np.ndarray, tol: float = 1e-12) -> RecursionState:
    """Find ``c*`` with ``f(c*) = 1`` by bracketing and bisection (f is increasing)."""
    hi = 1.0
    st_hi = recursion_state(gaps, hi)
    while st_hi.f_value < 1.0:
        hi *= 2.0
        st_hi = recursion_state(gaps, hi)
    if abs(st_hi.f_value - 1.0) <= tol:
        return st_hi
    lo = 0.0
    best = st_hi
    while hi - lo > 1e-15 * hi:
        mid = 0.5 * (lo + hi)
        st = recursion_state(gaps, mid)
        if abs(st.f_value - 1.0) <= tol:
            return st
        if st.f_value < 1.0:
            lo = mid
        else:
            hi = mid
            best = st
        if math.isfinite(st.f_value) and abs(st.f_value - 1.0) < abs(best.f_value - 1.0):
            best = st
    return best


def vanilla_allocation(mu: "BanditInstance | np.ndarray") -> AllocationResult:
    """Closed-form optimal allocation without smoothness constraint."""
    means = as_means(mu)
    a_star = best_arm(means)
    order = np.argsort(-means, kind="stable")
    order = np.concatenate(([a_star], order[order != a_star]))
    gaps = means[a_star] - means[order[1:]]
    st = solve_recursion(gaps)
    w_best = 1.0 / (1.0 + st.x.sum())
    w = np.empty(means.size)
    w[order[0]] = w_best
    w[order[1:]] = st.x * w_best
    omega = SimplexWeights.normalized(w)
    value = best_response(means, omega, a_star=a_star).value
    return AllocationResult(omega, 1.0 / value, value, 0, 0.0, "closed_form")


def _mirror_ascent_weights(
    means: np.ndarray,
    lap: np.ndarray,
    R: float,
    a_star: int,
    iters: int,
    *,
    fixed_horizon: bool = False,
    omega0: Optional[np.ndarray] = None,
) -> np.ndarray:
    K = means.size
    L = float((means.max() - means.min()) ** 2 / 2.0)
    if L == 0.0:
        return np.full(K, 1.0 / K)
    w0 = np.full(K, 1.0 / K) if omega0 is None else np.asarray(omega0, dtype=float)
    avg, status, w_fail = K_.mirror_ascent(means, lap, float(R), int(a_star), int(iters), L, bool(fixed_horizon), w0)
    if status != K_.OK:
        raise_for_status(status, where=f"mirror ascent at omega={np.round(w_fail, 6).tolist()}")
    return avg


def mirror_ascent_allocation(
    mu: "BanditInstance | np.ndarray",
    lap: "Laplacian | np.ndarray | None" = None,
    R: "SmoothnessBudget | float" = math.inf,
    iters: int = DEFAULT_ITERS,
    *,
    fixed_horizon: bool = False,
    omega0: Optional[np.ndarray] = None,
    a_star: Optional[int] = None,
) -> AllocationResult:
    """Approximate ``omega*`` by mirror ascent with the negative-entropy mirror map.

    Starts from ``omega0`` (uniform by default) and uses the step size
    ``sqrt(2 log K / s) / L`` at iteration ``s`` (``s = iters`` throughout when
    ``fixed_horizon``). The returned allocation is the average of the iterates
    and ``sup_gap_bound = L sqrt(2 log K / iters)`` bounds ``f(omega*) - f(avg)``.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    means = as_means(mu)
    K = means.size
    if a_star is None:
        a_star = best_arm(means)
    m = as_matrix(lap, K)
    budget = SmoothnessBudget.parse(R)
    avg = _mirror_ascent_weights(means, m, budget.R, a_star, iters, fixed_horizon=fixed_horizon, omega0=omega0)
    omega = SimplexWeights.normalized(avg)
    value = best_response(means, omega, m, budget, a_star=a_star).value
    L = lipschitz_constant(means)
    gap = L * math.sqrt(2.0 * math.log(K) / iters)
    t_star = 1.0 / value if value > 0 else math.inf
    return AllocationResult(omega, t_star, value, int(iters), gap, "mirror_ascent")


def characteristic_value(
    mu: "BanditInstance | np.ndarray",
    omega: "SimplexWeights | np.ndarray",
    lap: "Laplacian | np.ndarray | None" = None,
    R: "SmoothnessBudget | float" = math.inf,
) -> float:
    """f(omega): the value of the best response to ``omega``."""
    return best_response(mu, omega, lap, R).value


def allocate(
    mu: "BanditInstance | np.ndarray",
    lap: "Laplacian | np.ndarray | None" = None,
    R: "SmoothnessBudget | float" = math.inf,
    iters: int = DEFAULT_ITERS,
) -> AllocationResult:
    """Closed form when ``R`` is unbounded, mirror ascent otherwise."""
    if SmoothnessBudget.parse(R).unbounded:
        return vanilla_allocation(mu)
    return mirror_ascent_allocation(mu, lap, R, iters)
