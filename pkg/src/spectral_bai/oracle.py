"""Best-response oracles: the most confusing alternative instance for a fixed allocation.

For an allocation ``omega`` and an alternative arm ``i``, the oracle minimises
``sum_a omega_a (mu_a - lambda_a)^2 / 2`` over instances ``lambda`` in which arm
``i`` is at least as good as the current best arm. The vanilla oracle has a
closed form. With a finite smoothness budget ``R`` the response either
coincides with the vanilla one or sits on the boundary ``lambda^T L lambda = R``.
In that case it is obtained from a reduced linear system in which the best arm
is merged into arm ``i``, with a one-dimensional search over the Lagrange
multiplier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels as K_
from .core import (
    BanditInstance,
    Laplacian,
    SimplexWeights,
    SmoothnessBudget,
    as_matrix,
    as_means,
    as_weights,
    best_arm,
)
from .errors import BracketFailure, SingularSystem


@dataclass(frozen=True)
class BestResponse:
    """Alternative instance returned by an oracle (all indices 0-based)."""

    lam: np.ndarray
    alt_arm: int
    value: float
    divergences: np.ndarray
    saturated: bool = False
    gamma: Optional[float] = None

    def smoothness(self, lap: "Laplacian | np.ndarray") -> float:
        m = lap.matrix if isinstance(lap, Laplacian) else np.asarray(lap)
        return float(self.lam @ m @ self.lam)


def raise_for_status(status: int, *, where: str, gamma: float = math.nan) -> None:
    if status == K_.OK:
        return
    if status == K_.SINGULAR:
        raise SingularSystem(f"{where}: reduced system not positive definite at gamma={gamma:g}")
    if status == K_.NON_MONOTONE:
        raise BracketFailure(f"{where}: smoothness increased along gamma (at gamma={gamma:g})")
    raise BracketFailure(f"{where}: no multiplier bracket below gamma_max={K_.GAMMA_MAX:g} (last gamma={gamma:g})")


def _prepare(mu, omega, i=None, lap=None, a_star=None):
    means = as_means(mu)
    K = means.size
    w = as_weights(omega, K)
    if a_star is None:
        a_star = best_arm(means)
    if i is not None:
        if not 0 <= i < K:
            raise IndexError(f"arm {i} out of range for {K} arms")
        if i == a_star:
            raise ValueError(f"alternative arm {i} is the best arm")
    m = as_matrix(lap, K)
    return means, w, m, a_star


def _budget(R) -> float:
    return SmoothnessBudget.parse(R).R


def _wrap(lam, d, i, value, sat, gamma) -> BestResponse:
    lam = lam.copy()
    d = d.copy()
    lam.setflags(write=False)
    d.setflags(write=False)
    g = None if not sat or math.isnan(gamma) else float(gamma)
    return BestResponse(lam, int(i), float(value), d, bool(sat), g)


def vanilla_best_response_i(
    mu: "BanditInstance | np.ndarray",
    omega: "SimplexWeights | np.ndarray",
    i: int,
    *,
    a_star: Optional[int] = None,
) -> BestResponse:
    """Unconstrained best response with arm ``i`` as the alternative best arm.

    Arms ``a*`` and ``i`` are both moved to their ``omega``-weighted average; all
    other coordinates keep their means. When both weights are zero the
    unweighted average is used, which costs nothing either way.
    """
    means, w, _, a_star = _prepare(mu, omega, i, None, a_star)
    lam = np.empty(means.size)
    d = np.empty(means.size)
    value = K_.vanilla_pair(means, w, a_star, i, lam, d)
    return _wrap(lam, d, i, value, False, math.nan)


def spectral_best_response_i(
    mu: "BanditInstance | np.ndarray",
    omega: "SimplexWeights | np.ndarray",
    i: int,
    lap: "Laplacian | np.ndarray",
    R: "SmoothnessBudget | float",
    *,
    a_star: Optional[int] = None,
) -> BestResponse:
    means, w, m, a_star = _prepare(mu, omega, i, lap, a_star)
    lam = np.empty(means.size)
    d = np.empty(means.size)
    value, sat, gamma, status = K_.spectral_pair(means, w, m, _budget(R), a_star, i, lam, d)
    raise_for_status(status, where=f"spectral oracle (arm {i})", gamma=gamma)
    return _wrap(lam, d, i, value, sat, gamma)


def reduce(
    mu: "BanditInstance | np.ndarray",
    omega: "SimplexWeights | np.ndarray",
    i: int,
    lap: "Laplacian | np.ndarray",
    *,
    a_star: Optional[int] = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reduced problem in which ``lambda_a* = lambda_i`` is eliminated.

    Returns ``(mu_t, omega_t, lap_t)``, each of size ``K - 1``; arm ``a*`` is
    removed and arm ``i`` carries the merged mean and weight. No weight floor is
    applied here.
    """
    means, w, m, a_star = _prepare(mu, omega, i, lap, a_star)
    mu_t, w_t, lap_t, _, _ = K_.reduce_problem(means, w, m, a_star, i)
    return mu_t, w_t, lap_t


def reduced_position(K: int, a_star: int, i: int) -> int:
    """Position of arm ``i`` in the reduced vectors returned by :func:`reduce`."""
    del K
    return i if i < a_star else i - 1


def best_response(
    mu: "BanditInstance | np.ndarray",
    omega: "SimplexWeights | np.ndarray",
    lap: "Laplacian | np.ndarray | None" = None,
    R: "SmoothnessBudget | float" = math.inf,
    *,
    a_star: Optional[int] = None,
) -> BestResponse:
    """Best response over all alternative arms; ties go to the lowest arm index.

    ``a_star`` overrides the best-arm lookup (the simulator uses it to resolve
    ties in empirical means).
    """
    means, w, m, a_star = _prepare(mu, omega, None, lap, a_star)
    lam = np.empty(means.size)
    d = np.empty(means.size)
    i, value, sat, gamma, status = K_.best_response(means, w, m, _budget(R), a_star, lam, d)
    raise_for_status(status, where=f"spectral oracle (arm {i})", gamma=gamma)
    return _wrap(lam, d, i, value, sat, gamma)
