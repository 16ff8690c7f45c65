import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from spectral_bai.core import WeightedGraph, laplacian_from_graph
from spectral_bai.errors import AmbiguousBestArm
from spectral_bai.oracle import (
    best_response,
    reduce,
    reduced_position,
    spectral_best_response_i,
    vanilla_best_response_i,
)

MU = np.array([0.9, 0.5, 0.6])
UNIFORM = np.full(3, 1.0 / 3.0)


def ref_lap():
    return laplacian_from_graph(WeightedGraph(3, ((1, 2, 1.0),))).matrix


def zoom_grid_response(mu, w, lap, R, i, a_star=0, levels=8, n=81):
    """Constrained minimum by repeated grid refinement over all of lambda (K = 3 only)."""
    center = np.full(3, np.mean(mu))
    half = max(0.5, float(np.ptp(mu)))
    best_val, best_lam = np.inf, None
    for _ in range(levels):
        g = np.linspace(-half, half, n)
        lam = np.stack(np.meshgrid(*(c + g for c in center), indexing="ij"), axis=-1)
        S = np.einsum("...a,ab,...b->...", lam, lap, lam)
        feas = (S <= R) & (lam[..., i] >= lam[..., a_star])
        val = np.where(feas, (w * (mu - lam) ** 2 / 2).sum(-1), np.inf)
        k = np.unravel_index(np.argmin(val), val.shape)
        if val[k] < best_val:
            best_val, best_lam = float(val[k]), lam[k].copy()
        center = best_lam
        half /= 8
    return best_val, best_lam


@st.composite
def instances(draw, max_K=5):
    K = draw(st.integers(2, max_K))
    mu = np.array(draw(st.lists(st.floats(-2, 2), min_size=K, max_size=K)))
    top = np.sort(mu)
    assume(top[-1] - top[-2] > 1e-3)
    raw = np.array(draw(st.lists(st.floats(0.01, 1.0), min_size=K, max_size=K)))
    w = raw / raw.sum()
    edges = []
    for a in range(K):
        for b in range(a + 1, K):
            if draw(st.booleans()):
                edges.append((a, b, draw(st.floats(0.1, 2.0))))
    lap = laplacian_from_graph(WeightedGraph(K, tuple(edges))).matrix
    return mu, w, lap


class TestVanilla:
    def test_half_weights(self):
        r = vanilla_best_response_i(MU, [0.5, 0.0, 0.5], 2)
        np.testing.assert_allclose(r.lam, [0.75, 0.5, 0.75])
        assert r.value == pytest.approx(0.01125, abs=1e-15)

    def test_zero_weight_on_alternative(self):
        r = vanilla_best_response_i([1.0, 0.0], [1.0, 0.0], 1)
        np.testing.assert_allclose(r.lam, [1.0, 1.0])
        assert r.value == 0.0

    def test_both_weights_zero_uses_midpoint(self):
        r = vanilla_best_response_i(MU, [0.0, 0.0, 1.0], 1)
        assert r.lam[0] == r.lam[1] == pytest.approx(0.7)
        assert r.value == 0.0

    def test_uniform_matches_line_search(self):
        r = vanilla_best_response_i(MU, UNIFORM, 1)
        np.testing.assert_allclose(r.lam, [0.7, 0.7, 0.6])
        t = np.arange(0.5, 0.9 + 5e-7, 1e-6)
        grid = ((MU[0] - t) ** 2 + (MU[1] - t) ** 2) / 6.0
        assert abs(r.value - grid.min()) <= 1e-6

    def test_two_nonzero_divergences(self):
        r = vanilla_best_response_i([0.3, 0.9, 0.1, 0.5], [0.1, 0.4, 0.2, 0.3], 3)
        assert np.flatnonzero(r.divergences).tolist() == [1, 3]

    def test_rejects_best_arm_as_alternative(self):
        with pytest.raises(ValueError):
            vanilla_best_response_i(MU, UNIFORM, 0)
        with pytest.raises(IndexError):
            vanilla_best_response_i(MU, UNIFORM, 3)

    def test_random_feasible_points_never_beat_it(self, rng):
        for _ in range(500):
            K = int(rng.integers(2, 6))
            mu = rng.normal(size=K)
            w = rng.dirichlet(np.ones(K))
            a_star = int(np.argmax(mu))
            i = int(rng.choice([a for a in range(K) if a != a_star]))
            r = vanilla_best_response_i(mu, w, i)
            lam = mu + rng.normal(scale=0.5, size=(1000, K))
            swap = lam[:, i] < lam[:, a_star]
            lam[swap, i], lam[swap, a_star] = lam[swap, a_star], lam[swap, i].copy()
            vals = (w * (mu - lam) ** 2 / 2).sum(axis=1)
            assert r.value <= vals.min() + 1e-12


class TestReduce:
    def test_reference_instance(self):
        mu_t, w_t, lap_t = reduce(MU, UNIFORM, 2, ref_lap())
        np.testing.assert_array_equal(lap_t, [[1, -1], [-1, 1]])
        np.testing.assert_allclose(mu_t, [0.5, 0.75])
        np.testing.assert_allclose(w_t, [1 / 3, 2 / 3])
        assert reduced_position(3, 0, 2) == 1

    def test_collapsed_edge(self):
        lap = laplacian_from_graph(WeightedGraph(2, ((0, 1, 1.0),))).matrix
        _, _, lap_t = reduce([1.0, 0.0], [0.5, 0.5], 1, lap)
        np.testing.assert_array_equal(lap_t, [[0.0]])

    @given(instances())
    def test_reduced_form_equals_full_form_on_merged_vectors(self, inst):
        # for lambda with lambda_i = lambda_a*: lam^T L lam and the weighted
        # divergence shift by a constant between full and reduced problems
        mu, w, lap = inst
        K = mu.size
        a_star = int(np.argmax(mu))
        i = (a_star + 1) % K
        mu_t, w_t, lap_t = reduce(mu, w, i, lap)
        assert np.abs(lap_t.sum(axis=1)).max() <= 1e-9
        np.testing.assert_allclose(lap_t, lap_t.T)
        j = reduced_position(K, a_star, i)
        keep = [a for a in range(K) if a != a_star]
        rng = np.random.default_rng(0)
        offsets = []
        for _ in range(5):
            x = rng.normal(size=K - 1)
            lam = np.empty(K)
            lam[keep] = x
            lam[a_star] = x[j]
            assert x @ lap_t @ x == pytest.approx(lam @ lap @ lam, abs=1e-9)
            full = (w * (mu - lam) ** 2).sum() / 2
            red = (w_t * (mu_t - x) ** 2).sum() / 2
            offsets.append(full - red)
        assert np.ptp(offsets) <= 1e-9


class TestSpectral:
    def test_non_restrictive_budget_is_vanilla(self, rng):
        lap = ref_lap()
        for _ in range(50):
            w = rng.dirichlet(np.ones(3))
            for i in (1, 2):
                v = vanilla_best_response_i(MU, w, i)
                if v.smoothness(lap) > 0.1:
                    continue
                s = spectral_best_response_i(MU, w, i, lap, 0.1)
                assert not s.saturated and s.gamma is None
                np.testing.assert_array_equal(s.lam, v.lam)
                assert s.value == v.value

    def test_uniform_weights_tight_budget(self):
        lap = ref_lap()
        r = spectral_best_response_i(MU, UNIFORM, 2, lap, 0.01)
        assert r.saturated
        assert r.smoothness(lap) == pytest.approx(0.01, abs=1e-8)
        # grid refinement over the constrained set gives 0.01, attained at (0.7, 0.6, 0.7)
        assert r.value == pytest.approx(0.01, abs=1e-5)
        np.testing.assert_allclose(r.lam, [0.7, 0.6, 0.7], atol=1e-7)
        assert r.gamma == pytest.approx(1 / 6, rel=1e-6)

    @pytest.mark.parametrize(
        "w, i, expected",
        [
            # frozen from zoom_grid_response (8 levels of 81^3 points)
            ((1 / 3, 1 / 3, 1 / 3), 1, 0.0133333333333),
            ((1 / 3, 1 / 3, 1 / 3), 2, 0.0100000000000),
            ((0.2, 0.5, 0.3), 1, 0.0114285714286),
            ((0.2, 0.5, 0.3), 2, 0.0072000000000),
        ],
    )
    def test_matches_frozen_grid_values(self, w, i, expected):
        r = spectral_best_response_i(MU, np.array(w), i, ref_lap(), 0.01)
        assert r.value == pytest.approx(expected, abs=1e-5)
        assert r.smoothness(ref_lap()) <= 0.01 + 1e-8

    def test_matches_live_grid(self, rng):
        lap = ref_lap()
        for _ in range(3):
            w = rng.dirichlet(np.ones(3))
            for i in (1, 2):
                r = spectral_best_response_i(MU, w, i, lap, 0.01)
                ref, _ = zoom_grid_response(MU, w, lap, 0.01, i)
                assert r.value == pytest.approx(ref, abs=1e-5)

    def test_edgeless_graph_is_vanilla(self, rng):
        lap = np.zeros((4, 4))
        mu = np.array([0.1, 0.8, 0.3, 0.5])
        for R in (0.0, 0.01, 1.0):
            w = rng.dirichlet(np.ones(4))
            for i in (0, 2, 3):
                s = spectral_best_response_i(mu, w, i, lap, R)
                assert s.value == vanilla_best_response_i(mu, w, i).value
                assert not s.saturated

    def test_zero_weights_do_not_crash(self):
        r = spectral_best_response_i(MU, [1.0, 0.0, 0.0], 2, ref_lap(), 0.01)
        assert np.isfinite(r.value) and r.value >= 0.0
        r = best_response(MU, [0.0, 0.5, 0.5], ref_lap(), 0.0)
        assert np.isfinite(r.value)

    def test_zero_budget_forces_neighbours_equal(self):
        lap = ref_lap()
        r = spectral_best_response_i(MU, UNIFORM, 2, lap, 0.0)
        assert r.smoothness(lap) <= 1e-9
        assert r.lam[2] >= r.lam[0] - 1e-9

    @given(instances(), st.floats(0.0, 2.0))
    def test_saturation_and_membership(self, inst, R):
        mu, w, lap = inst
        a_star = int(np.argmax(mu))
        tol = 1e-9 * max(1.0, R)
        for i in range(mu.size):
            if i == a_star:
                continue
            v = vanilla_best_response_i(mu, w, i)
            s = spectral_best_response_i(mu, w, i, lap, R)
            assert s.value == pytest.approx(w @ s.divergences, abs=1e-10)
            assert s.lam[i] >= s.lam[a_star] - 1e-9
            assert s.smoothness(lap) <= R + 1e-8 * max(1.0, R)
            assert s.value >= v.value - 1e-12
            if v.smoothness(lap) > R + tol:
                assert s.saturated
                assert abs(s.smoothness(lap) - R) <= tol

    @given(instances(max_K=4))
    def test_value_nonincreasing_in_budget(self, inst):
        mu, w, lap = inst
        vals = [best_response(mu, w, lap, R).value for R in (0.0, 0.01, 0.1, 0.5, 2.0, np.inf)]
        assert all(a >= b - 1e-10 for a, b in zip(vals, vals[1:]))

    def test_smoothness_decreases_along_multiplier(self, rng):
        for _ in range(200):
            K = int(rng.integers(3, 7))
            mu = rng.normal(size=K)
            w = rng.dirichlet(np.ones(K))
            A = rng.random((K, K)) < 0.6
            edges = tuple((a, b, float(rng.exponential())) for a in range(K) for b in range(a + 1, K) if A[a, b])
            lap = laplacian_from_graph(WeightedGraph(K, edges)).matrix
            a_star = int(np.argmax(mu))
            i = (a_star + 1) % K
            mu_t, w_t, lap_t = reduce(mu, w, i, lap)
            S = []
            for g in np.geomspace(1e-4, 1e4, 60):
                x = np.linalg.solve(np.diag(w_t) + 2 * g * lap_t, w_t * mu_t)
                S.append(x @ lap_t @ x)
            assert all(a >= b - 1e-12 * max(1.0, a) for a, b in zip(S, S[1:]))

    def test_random_feasible_points_never_beat_it(self, rng):
        n_checked = 0
        for _ in range(100):
            K = int(rng.integers(3, 5))
            mu = rng.uniform(0, 1, size=K)
            w = rng.dirichlet(np.ones(K))
            lap = laplacian_from_graph(WeightedGraph(K, tuple((a, a + 1, 1.0) for a in range(K - 1)))).matrix
            R = float(rng.uniform(0.2, 1.0) * (mu @ lap @ mu))
            a_star = int(np.argmax(mu))
            for i in range(K):
                if i == a_star:
                    continue
                s = spectral_best_response_i(mu, w, i, lap, R)
                lam = rng.uniform(mu.min() - 0.2, mu.max() + 0.2, size=(100_000, K))
                S = np.einsum("na,ab,nb->n", lam, lap, lam)
                ok = (S <= R) & (lam[:, i] >= lam[:, a_star])
                if ok.any():
                    vals = (w * (mu - lam[ok]) ** 2 / 2).sum(axis=1)
                    assert s.value <= vals.min() + 1e-12
                    n_checked += 1
        assert n_checked > 100


class TestBestResponse:
    def test_uniform_unconstrained_prefers_closer_arm(self):
        r = best_response(MU, UNIFORM)
        assert r.alt_arm == 2
        assert r.value == pytest.approx(min(0.0133333333333, 0.0075), abs=1e-12)

    def test_two_arms(self):
        assert best_response([0.0, 1.0], [0.3, 0.7]).alt_arm == 0

    def test_ties_go_to_lowest_index(self):
        r = best_response([1.0, 0.5, 0.5], UNIFORM)
        assert r.alt_arm == 1

    def test_ambiguous_best(self):
        with pytest.raises(AmbiguousBestArm):
            best_response([1.0, 1.0, 0.0], UNIFORM)

    def test_explicit_best_arm_resolves_ties(self):
        r = best_response([1.0, 1.0, 0.0], UNIFORM, a_star=0)
        assert r.alt_arm == 1 and r.value == 0.0

    @given(instances())
    def test_is_min_over_pairs(self, inst):
        mu, w, lap = inst
        a_star = int(np.argmax(mu))
        for R in (0.05, np.inf):
            r = best_response(mu, w, lap, R)
            pair = [spectral_best_response_i(mu, w, i, lap, R).value for i in range(mu.size) if i != a_star]
            assert r.value == min(pair)
            assert r.value >= 0.0


class TestMeansOutsideBudget:
    """Empirical means can violate the budget; the response must stay optimal."""

    MU_OUT = np.array([0.0, 1.0, 0.9])

    @staticmethod
    def chain():
        return laplacian_from_graph(WeightedGraph(3, ((0, 1, 1.0), (1, 2, 1.0)))).matrix

    def test_budget_alone_can_flip_the_order(self):
        lap = self.chain()
        w = np.array([0.2, 0.4, 0.4])
        r = spectral_best_response_i(self.MU_OUT, w, 2, lap, 0.02)
        assert r.saturated
        assert r.lam[2] > r.lam[1] + 1e-6
        assert r.smoothness(lap) == pytest.approx(0.02, abs=1e-9)
        ref, _ = zoom_grid_response(self.MU_OUT, w, lap, 0.02, 2, a_star=1)
        assert r.value == pytest.approx(ref, abs=1e-5)

    def test_other_arm_uses_merged_system(self):
        lap = self.chain()
        w = np.array([0.2, 0.4, 0.4])
        r = spectral_best_response_i(self.MU_OUT, w, 0, lap, 0.02)
        assert r.lam[0] == pytest.approx(r.lam[1], abs=1e-12)
        ref, _ = zoom_grid_response(self.MU_OUT, w, lap, 0.02, 0, a_star=1)
        assert r.value == pytest.approx(ref, abs=1e-5)
