"""Domain types and elementary formulas.

Arm indices are 0-based throughout the Python API. The CLI and the JSON/CSV
file formats use 1-based indices and convert at the boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import AmbiguousBestArm

TIE_TOL = 1e-12
SIMPLEX_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BanditInstance:
    """Unit-variance Gaussian bandit described by its mean vector."""

    means: np.ndarray

    def __post_init__(self) -> None:
        means = np.array(self.means, dtype=float).reshape(-1)
        if means.size < 2:
            raise ValueError(f"need at least 2 arms, got {means.size}")
        if not np.all(np.isfinite(means)):
            raise ValueError("all means must be finite")
        object.__setattr__(self, "means", _frozen(means))

    @property
    def K(self) -> int:
        return int(self.means.size)

    @property
    def best(self) -> int:
        return best_arm(self)

    @property
    def max_mean(self) -> float:
        return float(self.means.max())


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected weighted graph on ``K`` nodes given by an edge list ``(a, b, w)``."""

    K: int
    edges: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ValueError("graph needs at least one node")
        seen = set()
        clean = []
        for edge in self.edges:
            a, b, w = edge
            a, b, w = int(a), int(b), float(w)
            if not (0 <= a < self.K and 0 <= b < self.K):
                raise ValueError(f"edge ({a}, {b}) has a node outside [0, {self.K})")
            if a == b:
                raise ValueError(f"self-loop on node {a}")
            if not (w >= 0 and math.isfinite(w)):
                raise ValueError(f"edge ({a}, {b}) has invalid weight {w}")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            clean.append((a, b, w))
        object.__setattr__(self, "edges", tuple(clean))

    @classmethod
    def from_one_based(cls, K: int, edges: Iterable[Sequence[float]]) -> "WeightedGraph":
        out = []
        for e in edges:
            if len(e) != 3:
                raise ValueError(f"edge must be [a, b, weight], got {e!r}")
            a, b, w = e
            if float(a) != int(a) or float(b) != int(b):
                raise ValueError(f"edge endpoints must be integers, got {e!r}")
            out.append((int(a) - 1, int(b) - 1, float(w)))
        return cls(K, tuple(out))

    def one_based_edges(self) -> list[list[float]]:
        return [[a + 1, b + 1, w] for a, b, w in self.edges]


@dataclass(frozen=True)
class Laplacian:
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("Laplacian must be a square matrix")
        if not np.allclose(m, m.T, rtol=0, atol=1e-12):
            raise ValueError("Laplacian must be symmetric")
        scale = max(1.0, float(np.abs(m).max(initial=0.0)))
        if np.abs(m.sum(axis=1)).max(initial=0.0) > 1e-10 * scale:
            raise ValueError("Laplacian rows must sum to zero")
        off = m - np.diag(np.diag(m))
        if off.max(initial=0.0) > 0:
            raise ValueError("Laplacian off-diagonal entries must be <= 0")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def K(self) -> int:
        return int(self.matrix.shape[0])

    @classmethod
    def zeros(cls, K: int) -> "Laplacian":
        return cls(np.zeros((K, K)))


@dataclass(frozen=True)
class SimplexWeights:
    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=float).reshape(-1)
        if w.size == 0 or not np.all(np.isfinite(w)):
            raise ValueError("weights must be a nonempty finite vector")
        if w.min() < 0:
            raise ValueError(f"weights must be nonnegative, got min {w.min()}")
        if abs(w.sum() - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
        object.__setattr__(self, "weights", _frozen(w))

    @classmethod
    def normalized(cls, w: Sequence[float] | np.ndarray) -> "SimplexWeights":
        """Rescale a nonnegative vector onto the simplex."""
        w = np.asarray(w, dtype=float)
        w = np.clip(w, 0.0, None)
        w = w / w.sum()
        # one extra pass absorbs the rounding left by the division
        w[np.argmax(w)] += 1.0 - w.sum()
        return cls(w)

    @classmethod
    def uniform(cls, K: int) -> "SimplexWeights":
        return cls(np.full(K, 1.0 / K))

    @property
    def K(self) -> int:
        return int(self.weights.size)


@dataclass(frozen=True)
class SmoothnessBudget:
    """Upper bound ``R`` on the Laplacian quadratic form; ``inf`` means unconstrained."""

    R: float = field(default=math.inf)

    def __post_init__(self) -> None:
        R = float(self.R)
        if math.isnan(R) or R < 0:
            raise ValueError(f"smoothness budget must be >= 0, got {self.R!r}")
        object.__setattr__(self, "R", R)

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.R)

    @classmethod
    def parse(cls, value: "float | str | SmoothnessBudget") -> "SmoothnessBudget":
        if isinstance(value, SmoothnessBudget):
            return value
        if isinstance(value, str):
            if value.strip().lower() in ("inf", "infinity", "+inf", "unbounded"):
                return cls(math.inf)
            return cls(float(value))
        return cls(float(value))

    def __str__(self) -> str:
        return "inf" if self.unbounded else repr(self.R)


UNBOUNDED = SmoothnessBudget(math.inf)


def as_means(mu: "BanditInstance | Sequence[float] | np.ndarray") -> np.ndarray:
    if isinstance(mu, BanditInstance):
        return mu.means
    return BanditInstance(mu).means


def as_matrix(lap: "Laplacian | np.ndarray | None", K: int) -> np.ndarray:
    if lap is None:
        return np.zeros((K, K))
    m = lap.matrix if isinstance(lap, Laplacian) else Laplacian(lap).matrix
    if m.shape != (K, K):
        raise ValueError(f"Laplacian is {m.shape[0]}x{m.shape[1]} but there are {K} arms")
    return m


def as_weights(omega: "SimplexWeights | Sequence[float] | np.ndarray", K: int) -> np.ndarray:
    w = omega.weights if isinstance(omega, SimplexWeights) else SimplexWeights(omega).weights
    if w.size != K:
        raise ValueError(f"weight vector has {w.size} entries but there are {K} arms")
    return w


def kl_gaussian(mu: float, lam: float) -> float:
    """KL divergence between unit-variance Gaussians with means ``mu`` and ``lam``."""
    return (mu - lam) ** 2 / 2.0


def laplacian_from_graph(g: WeightedGraph) -> Laplacian:
    m = np.zeros((g.K, g.K))
    for a, b, w in g.edges:
        m[a, b] -= w
        m[b, a] -= w
        m[a, a] += w
        m[b, b] += w
    return Laplacian(m)


def smoothness(mu: "BanditInstance | Sequence[float] | np.ndarray", lap: "Laplacian | np.ndarray") -> float:
    """Graph smoothness ``mu^T L mu``."""
    x = np.asarray(mu.means if isinstance(mu, BanditInstance) else mu, dtype=float)
    m = lap.matrix if isinstance(lap, Laplacian) else np.asarray(lap, dtype=float)
    if m.shape != (x.size, x.size):
        raise ValueError(f"dimension mismatch: {x.size} means vs {m.shape} Laplacian")
    return float(x @ m @ x)


def smoothness_edge_sum(mu: Sequence[float] | np.ndarray, g: WeightedGraph) -> float:
    """Pairwise form sum_{a,b} w_ab (mu_a - mu_b)^2 / 2 over ordered pairs."""
    x = np.asarray(mu, dtype=float)
    return float(sum(w * (x[a] - x[b]) ** 2 for a, b, w in g.edges))


def best_arm(mu: "BanditInstance | Sequence[float] | np.ndarray", tol: float = TIE_TOL) -> int:
    """Index of the unique maximal mean.

    Raises AmbiguousBestArm when another mean lies within ``tol`` of the maximum.
    """
    x = np.asarray(mu.means if isinstance(mu, BanditInstance) else mu, dtype=float)
    a = int(np.argmax(x))
    if np.count_nonzero(x >= x[a] - tol) > 1:
        tied = np.flatnonzero(x >= x[a] - tol).tolist()
        raise AmbiguousBestArm(f"arms {tied} are tied for the maximum {x[a]!r}")
    return a


def best_arm_lowest(mu: Sequence[float] | np.ndarray) -> int:
    """Argmax with ties resolved to the lowest index (used on empirical means)."""
    return int(np.argmax(np.asarray(mu, dtype=float)))
