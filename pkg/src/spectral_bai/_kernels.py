"""Compiled inner loops shared by the oracle, the allocation solver and the simulator.

Everything here works on plain float64 arrays with 0-based indices and reports
failures through integer status codes; the public wrappers turn those into
exceptions.

The hot path keeps all scratch vectors in one 2-D workspace indexed by row
constants below; slicing views out of it inside the loop costs more than the
arithmetic for small K.
"""

import numpy as np
from numba import njit

OMEGA_FLOOR = 1e-12
GAMMA_MAX = 1e12
MAX_GAMMA_STEPS = 400

OK = 0
SINGULAR = 1
NO_BRACKET = 2
NON_MONOTONE = 3

# workspace rows
MU_T = 0
W_T = 1
RHS = 2
X = 3
V = 4
Y = 5
X_HI = 6
LAM = 7
D = 8
BEST_LAM = 9
BEST_D = 10
PROJ = 11
N_ROWS = 12

# matrix slots
LAP_T = 0
MAT = 1
LOW = 2

_jit = njit(cache=True, error_model="numpy")
# Helpers that only touch caller-provided scratch never allocate, so they are
# compiled without runtime reference counting; at K ~ 3 the refcount traffic
# on array arguments otherwise costs more than the arithmetic.
_scratch_jit = njit(cache=True, error_model="numpy", _nrt=False)


@_jit
def make_workspace(K):
    return np.zeros((N_ROWS, K)), np.zeros((3, K, K)), np.zeros(K, np.int64)


@_scratch_jit
def _vanilla(mu, omega, a_star, i, ws):
    wa = omega[a_star]
    wi = omega[i]
    s = wa + wi
    if s > 0.0:
        t = (wa * mu[a_star] + wi * mu[i]) / s
    else:
        t = 0.5 * (mu[a_star] + mu[i])
    for a in range(mu.size):
        ws[LAM, a] = mu[a]
        ws[D, a] = 0.0
    ws[LAM, a_star] = t
    ws[LAM, i] = t
    da = 0.5 * (mu[a_star] - t) ** 2
    di = 0.5 * (mu[i] - t) ** 2
    ws[D, a_star] = da
    ws[D, i] = di
    return wa * da + wi * di


@_scratch_jit
def _lam_smoothness(ws, lap):
    K = lap.shape[0]
    s = 0.0
    for a in range(K):
        r = 0.0
        for b in range(K):
            r += lap[a, b] * ws[LAM, b]
        s += ws[LAM, a] * r
    return s


@_scratch_jit
def _reduce(mu, omega, lap, a_star, i, ws, mats, idx):
    """Merge arm a_star into arm i and drop it.

    Writes the reduced means/weights to ws[MU_T], ws[W_T] and P^T lap P to
    mats[LAP_T] (P the merge map); idx[r] is the original arm at reduced
    position r. Returns the reduced position of arm i. The merged weight is
    omega[a_star] + omega[i].
    """
    K = mu.size
    n = K - 1
    j = 0
    for a in range(K):
        if a != a_star:
            idx[j] = a
            j += 1
    merged = i if i < a_star else i - 1
    for r in range(n):
        ws[MU_T, r] = mu[idx[r]]
        ws[W_T, r] = omega[idx[r]]
    wa = omega[a_star]
    wi = omega[i]
    s = wa + wi
    if s > 0.0:
        ws[MU_T, merged] = (wa * mu[a_star] + wi * mu[i]) / s
    else:
        ws[MU_T, merged] = 0.5 * (mu[a_star] + mu[i])
    ws[W_T, merged] = s
    for r in range(n):
        a = idx[r]
        for c in range(n):
            b = idx[c]
            v = lap[a, b]
            if r == merged:
                v += lap[a_star, b]
            if c == merged:
                v += lap[a, a_star]
            if r == merged and c == merged:
                v += lap[a_star, a_star]
            mats[LAP_T, r, c] = v
    return merged


@_scratch_jit
def _solve(mats, ws, n, src, dst):
    """Solve with the Cholesky factor in mats[LOW]: ws[dst] = M^{-1} ws[src]."""
    for r in range(n):
        s = ws[src, r]
        for k in range(r):
            s -= mats[LOW, r, k] * ws[dst, k]
        ws[dst, r] = s / mats[LOW, r, r]
    for r in range(n - 1, -1, -1):
        s = ws[dst, r]
        for k in range(r + 1, n):
            s -= mats[LOW, k, r] * ws[dst, k]
        ws[dst, r] = s / mats[LOW, r, r]


@_scratch_jit
def _eval_gamma(g, n, ws, mats):
    """x = (W + 2 g L)^{-1} W mu_t; returns (ok, S, dS/dg) with S = x^T L x."""
    for r in range(n):
        for c in range(n):
            mats[MAT, r, c] = 2.0 * g * mats[LAP_T, r, c]
        mats[MAT, r, r] += ws[W_T, r]
    for j in range(n):
        s = mats[MAT, j, j]
        for k in range(j):
            s -= mats[LOW, j, k] * mats[LOW, j, k]
        if not (s > 0.0) or not np.isfinite(s):
            return False, np.nan, np.nan
        piv = np.sqrt(s)
        mats[LOW, j, j] = piv
        for r in range(j + 1, n):
            s2 = mats[MAT, r, j]
            for k in range(j):
                s2 -= mats[LOW, r, k] * mats[LOW, j, k]
            mats[LOW, r, j] = s2 / piv
    _solve(mats, ws, n, RHS, X)
    S = 0.0
    for r in range(n):
        acc = 0.0
        for c in range(n):
            acc += mats[LAP_T, r, c] * ws[X, c]
        ws[V, r] = acc
        S += ws[X, r] * acc
    _solve(mats, ws, n, V, Y)
    dS = 0.0
    for r in range(n):
        dS += ws[V, r] * ws[Y, r]
    return True, S, -4.0 * dS


@_scratch_jit
def _solve_multiplier(n, R, S0, ws, mats):
    """Find gamma > 0 with S(gamma) = R for the system staged in ws/mats.

    S(gamma) = x^T L x with x = (W + 2 gamma L)^{-1} W m, where W = diag(ws[W_T]),
    L = mats[LAP_T], W m = ws[RHS], all of size n, and S(0) = S0 > R. On success
    the solution is left in ws[X]. Returns (gamma, status).
    """
    tol = 1e-9 * max(1.0, R)
    # aiming below tol would chase S -> 0 for nothing once |S - R| <= tol is met
    target = max(R, 0.5 * tol)
    inv_sqrt_target = 1.0 / np.sqrt(target)
    lo = 0.0
    S_lo = S0
    hi = np.inf
    g = 0.0
    for _ in range(MAX_GAMMA_STEPS):
        ok, S, dS = _eval_gamma(g, n, ws, mats)
        if not ok:
            return g, SINGULAR
        if abs(S - R) <= tol:
            return g, OK
        if S > R:
            if g > lo and S > S_lo * (1.0 + 1e-12):
                return g, NON_MONOTONE
            lo = g
            S_lo = S
        else:
            hi = g
            for r in range(n):
                ws[X_HI, r] = ws[X, r]
        # Newton on 1/sqrt(S), which is concave and nearly linear in gamma
        g_new = np.nan
        if S > 0.0 and dS < 0.0:
            phi = 1.0 / np.sqrt(S) - inv_sqrt_target
            dphi = -0.5 * dS / (S * np.sqrt(S))
            g_new = g - phi / dphi
        if hi < np.inf:
            if hi - lo <= 1e-14 * hi:
                for r in range(n):
                    ws[X, r] = ws[X_HI, r]
                return hi, OK
            if not (lo < g_new < hi):
                g_new = 0.5 * (lo + hi)
        elif not (g_new > lo):
            g_new = 2.0 * lo if lo > 0.0 else 1.0
        if g_new > GAMMA_MAX:
            return g_new, NO_BRACKET
        g = g_new
    return g, NO_BRACKET


@_scratch_jit
def _divergences(mu, omega, ws):
    """Fill ws[D] from ws[LAM] and return the weighted sum."""
    value = 0.0
    for a in range(mu.size):
        da = 0.5 * (mu[a] - ws[LAM, a]) ** 2
        ws[D, a] = da
        value += omega[a] * da
    return value


@_scratch_jit
def _saturated(mu, omega, lap, R, a_star, i, S0, ws, mats, idx):
    """Response with both lam_i = lam_a* and lam^T L lam = R; returns (value, gamma, status)."""
    n = mu.size - 1
    merged = _reduce(mu, omega, lap, a_star, i, ws, mats, idx)
    for r in range(n):
        if ws[W_T, r] < OMEGA_FLOOR:
            ws[W_T, r] = OMEGA_FLOOR
        ws[RHS, r] = ws[W_T, r] * ws[MU_T, r]
    # x(0) = mu_t is the vanilla response, whose smoothness is S0 > R
    g, st = _solve_multiplier(n, R, S0, ws, mats)
    if st != OK:
        return np.nan, g, st
    for r in range(n):
        ws[LAM, idx[r]] = ws[X, r]
    ws[LAM, a_star] = ws[X, merged]
    return _divergences(mu, omega, ws), g, OK


@_scratch_jit
def _project_means(mu, omega, lap, R, S_mu, ws, mats):
    """Weighted projection of mu onto {lam^T L lam <= R} into ws[PROJ]; returns (gamma, status).

    Only needed when mu itself is outside the budget (empirical means can be).
    """
    K = mu.size
    for a in range(K):
        w = omega[a] if omega[a] > OMEGA_FLOOR else OMEGA_FLOOR
        ws[W_T, a] = w
        ws[RHS, a] = w * mu[a]
        for b in range(K):
            mats[LAP_T, a, b] = lap[a, b]
    g, st = _solve_multiplier(K, R, S_mu, ws, mats)
    for a in range(K):
        ws[PROJ, a] = ws[X, a]
    return g, st


@_scratch_jit
def _constrained(mu, omega, lap, R, a_star, i, S0, proj, g_proj, ws, mats, idx):
    """Response for arm i when the vanilla one (smoothness S0) is over budget.

    ``proj`` caches the projection of mu across calls with the same (mu, omega):
    0 not computed yet, 1 stored in ws[PROJ] with multiplier g_proj, -1 mu is
    within budget. Returns (value, gamma, status, proj, g_proj).
    """
    if proj == 0:
        tol = 1e-9 * max(1.0, R)
        S_mu = 0.0
        for a in range(mu.size):
            r = 0.0
            for b in range(mu.size):
                r += lap[a, b] * mu[b]
            S_mu += mu[a] * r
        if S_mu > R + tol:
            g_proj, st = _project_means(mu, omega, lap, R, S_mu, ws, mats)
            if st != OK:
                return np.nan, g_proj, st, proj, g_proj
            proj = 1
        else:
            proj = -1
    if proj == 1 and ws[PROJ, i] >= ws[PROJ, a_star]:
        # the budget alone already makes arm i look at least as good as a*
        for a in range(mu.size):
            ws[LAM, a] = ws[PROJ, a]
        return _divergences(mu, omega, ws), g_proj, OK, proj, g_proj
    value, g, st = _saturated(mu, omega, lap, R, a_star, i, S0, ws, mats, idx)
    return value, g, st, proj, g_proj


@_scratch_jit
def _pair(mu, omega, lap, R, a_star, i, ws, mats, idx):
    """Response for alternative arm i in ws[LAM], ws[D]; returns (value, saturated, gamma, status)."""
    value = _vanilla(mu, omega, a_star, i, ws)
    if R == np.inf:
        return value, False, np.nan, OK
    S0 = _lam_smoothness(ws, lap)
    # within the saturation tolerance the vanilla response already counts as feasible
    if S0 <= R + 1e-9 * max(1.0, R):
        return value, False, np.nan, OK
    value, g, st, _, _ = _constrained(mu, omega, lap, R, a_star, i, S0, 0, np.nan, ws, mats, idx)
    return value, True, g, st


@_scratch_jit
def _best(mu, omega, lap, R, a_star, ws, mats, idx):
    """Best response over i != a_star into ws[BEST_LAM], ws[BEST_D] (lowest i wins ties).

    Returns (alt_arm, value, saturated, gamma, status).
    """
    K = mu.size
    best_val = np.inf
    best_i = -1
    best_sat = False
    best_g = np.nan
    proj = 0
    g_proj = np.nan
    for i in range(K):
        if i == a_star:
            continue
        # same logic as _pair, spelled out so the common vanilla path makes no calls
        val = _vanilla(mu, omega, a_star, i, ws)
        sat = False
        g = np.nan
        if R != np.inf:
            S0 = _lam_smoothness(ws, lap)
            if S0 > R + 1e-9 * max(1.0, R):
                val, g, st, proj, g_proj = _constrained(mu, omega, lap, R, a_star, i, S0, proj, g_proj, ws, mats, idx)
                sat = True
                if st != OK:
                    return i, val, sat, g, st
        if val < best_val:
            best_val = val
            best_i = i
            best_sat = sat
            best_g = g
            for a in range(K):
                ws[BEST_LAM, a] = ws[LAM, a]
                ws[BEST_D, a] = ws[D, a]
    return best_i, best_val, best_sat, best_g, OK


@_jit
def vanilla_pair(mu, omega, a_star, i, lam, d):
    """Closed-form best response in the half-space {lam_i >= lam_a*}; writes lam, d."""
    ws = np.zeros((N_ROWS, mu.size))
    value = _vanilla(mu, omega, a_star, i, ws)
    lam[:] = ws[LAM]
    d[:] = ws[D]
    return value


@_jit
def spectral_pair(mu, omega, lap, R, a_star, i, lam, d):
    """Best response in {lam_i >= lam_a*, lam^T L lam <= R}; writes lam, d.

    Returns (value, saturated, gamma, status); gamma is NaN when the
    unconstrained response is already feasible.
    """
    ws, mats, idx = make_workspace(mu.size)
    value, sat, g, st = _pair(mu, omega, lap, R, a_star, i, ws, mats, idx)
    lam[:] = ws[LAM]
    d[:] = ws[D]
    return value, sat, g, st


@_jit
def reduce_problem(mu, omega, lap, a_star, i):
    """Returns (mu_t, w_t, lap_t, merged, idx) of the reduced problem (no weight floor)."""
    ws, mats, idx = make_workspace(mu.size)
    merged = _reduce(mu, omega, lap, a_star, i, ws, mats, idx)
    n = mu.size - 1
    return ws[MU_T, :n].copy(), ws[W_T, :n].copy(), mats[LAP_T, :n, :n].copy(), merged, idx[:n].copy()


@_jit
def best_response(mu, omega, lap, R, a_star, lam_out, d_out):
    """Returns (alt_arm, value, saturated, gamma, status); writes lam_out, d_out."""
    ws, mats, idx = make_workspace(mu.size)
    res = _best(mu, omega, lap, R, a_star, ws, mats, idx)
    lam_out[:] = ws[BEST_LAM]
    d_out[:] = ws[BEST_D]
    return res


@_jit
def mirror_ascent(mu, lap, R, a_star, iters, L, fixed_horizon, omega0):
    """Entropic mirror ascent on f(w) = min_lambda sum_a w_a k(mu_a, lambda_a).

    Returns (average of the first ``iters`` iterates, status, last iterate).
    """
    K = mu.size
    w = omega0.copy()
    avg = np.zeros(K)
    ws, mats, idx = make_workspace(K)
    log_k = np.log(K)
    for s in range(1, iters + 1):
        for a in range(K):
            avg[a] += w[a]
        if s == iters:
            break
        alt, val, sat, g, st = _best(mu, w, lap, R, a_star, ws, mats, idx)
        if st != OK:
            return avg / s, st, w
        horizon = iters if fixed_horizon else s
        eta = np.sqrt(2.0 * log_k / horizon) / L
        dmax = 0.0
        for a in range(K):
            dmax = max(dmax, ws[BEST_D, a])
        tot = 0.0
        for a in range(K):
            w[a] *= np.exp(eta * (ws[BEST_D, a] - dmax))
            tot += w[a]
        for a in range(K):
            w[a] /= tot
    return avg / iters, OK, w
