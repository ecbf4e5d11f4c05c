import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bppnnls import sparsemat
from bppnnls.errors import IterationLimit, NoInfeasible, TooLarge
from bppnnls.nnls import (
    ExchangeRule,
    IterationState,
    Mode,
    Partition,
    Problem,
    SolverOptions,
    bpp_solve,
    dual_vector,
    exchange_infeasible,
    kkt_residuals,
    oracle_nnls,
    unconstrained_ls_normal_eq,
    zero_clamp,
)
from bppnnls.sparsemat import from_dense, gram, identity

from conftest import degenerate_problem, full_rank_problem, random_sparse_dense

A32 = from_dense([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
b32 = np.array([-1.0, 1.0, 0.0])


def part(F, G):
    return Partition(np.array(F, dtype=np.int64), np.array(G, dtype=np.int64))


class TestSubproblems:
    def test_normal_eq_identity(self):
        A = identity(2)
        x, _ = unconstrained_ls_normal_eq(A, gram(A), [0, 1], [1.0, 2.0])
        np.testing.assert_allclose(x, [1, 2])

    @pytest.mark.parametrize("sel, expected", [([1], [0.5]), ([0, 1], [-1.0, 1.0])])
    def test_normal_eq_small(self, sel, expected):
        x, _ = unconstrained_ls_normal_eq(A32, gram(A32), sel, b32)
        np.testing.assert_allclose(x, expected, rtol=1e-15, atol=1e-15)
        D = A32.to_dense()[:, sel]
        np.testing.assert_allclose(x, np.linalg.lstsq(D, b32, rcond=None)[0], rtol=1e-14)

    def test_normal_eq_uses_cached_gram(self):
        G = gram(A32)
        before = sparsemat.gram_call_count()
        unconstrained_ls_normal_eq(A32, G, [0, 1], b32)
        assert sparsemat.gram_call_count() == before

    def test_dual_vector(self):
        assert dual_vector(A32, [], np.ones(3)).shape == (0,)
        np.testing.assert_array_equal(dual_vector(A32, [0, 1], np.zeros(3)), [0, 0])
        np.testing.assert_allclose(dual_vector(A32, [0], [1.0, -0.5, 0.5]), [1.5])

    def test_zero_clamp(self):
        np.testing.assert_array_equal(zero_clamp([1e-13, 5.0, -1e-13], 1e-12), [0, 5, 0])
        np.testing.assert_array_equal(zero_clamp([0.0, 0.0], 0.3), [0, 0])
        np.testing.assert_array_equal(zero_clamp([-1e-12, 1e-12], 1e-12), [-1e-12, 1e-12])


class TestExchange:
    def test_all(self):
        s = IterationState(part([0, 1], [2]), np.array([-1.0, 2.0]), np.array([3.0]), p=3)
        new = exchange_infeasible(s, ExchangeRule.All)
        assert new.F.tolist() == [1] and new.G.tolist() == [0, 2]

    def test_single_largest(self):
        s = IterationState(part([0], [1, 2]), np.array([-1.0]), np.array([-1.0, -1.0]), p=0)
        new = exchange_infeasible(s, ExchangeRule.SingleLargestIndex)
        assert new.F.tolist() == [0, 2] and new.G.tolist() == [1]

    def test_all_from_empty_free_set(self):
        s = IterationState(part([], [0, 1]), np.zeros(0), np.array([-1.0, 0.0]), p=3)
        new = exchange_infeasible(s, ExchangeRule.All)
        assert new.F.tolist() == [0] and new.G.tolist() == [1]

    def test_feasible_state_rejected(self):
        s = IterationState(part([0], [1]), np.array([1.0]), np.array([0.0]), p=3)
        with pytest.raises(NoInfeasible):
            exchange_infeasible(s, ExchangeRule.All)

    @given(st.lists(st.booleans(), min_size=1, max_size=12), st.integers(0, 2**32 - 1))
    def test_partition_integrity(self, free, seed):
        rng = np.random.default_rng(seed)
        p = Partition.from_free_mask(np.array(free))
        xF = rng.standard_normal(len(p.F))
        yG = rng.standard_normal(len(p.G))
        s = IterationState(p, xF, yG, p=0)
        if not (np.any(xF < 0) or np.any(yG < 0)):
            return
        for rule in ExchangeRule:
            exchange_infeasible(s, rule).check(len(free))


class TestSolve:
    def test_identity_negative_entry(self):
        r = bpp_solve(Problem(identity(2), [3.0, -2.0]))
        np.testing.assert_allclose(r.x, [3, 0])
        np.testing.assert_allclose(r.y, [0, 2])

    def test_identity_positive(self):
        r = bpp_solve(Problem(identity(2), [1.0, 2.0]))
        np.testing.assert_allclose(r.x, [1, 2], rtol=1e-15)
        np.testing.assert_allclose(r.y, [0, 0], atol=1e-15)
        assert r.objective == pytest.approx(0.0, abs=1e-28)

    @pytest.mark.parametrize("mode", list(Mode))
    def test_small_example(self, small_example, mode):
        # enumeration of the four supports by hand: only F={1} is feasible
        r = bpp_solve(small_example, SolverOptions(mode=mode))
        np.testing.assert_allclose(r.x, [0.0, 0.5], atol=1e-15)
        np.testing.assert_allclose(r.y, [1.5, 0.0], atol=1e-15)
        assert r.objective == pytest.approx(0.75, rel=1e-14)
        assert r.F.tolist() == [1]

    def test_x_zero_when_Atb_nonpositive(self):
        A = from_dense([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
        r = bpp_solve(Problem(A, [-1.0, -2.0, 5.0]))
        np.testing.assert_array_equal(r.x, [0, 0])
        assert r.pivot_iterations == 0 and not r.refined_with_lsqr

    def test_one_gram_per_solve(self, rng):
        before = sparsemat.gram_call_count()
        for _ in range(5):
            bpp_solve(full_rank_problem(rng, 20, 10, 0.5))
        assert sparsemat.gram_call_count() - before == 5

    def test_refinement_flag(self, rng):
        P = full_rank_problem(rng, 30, 10, 1.0)
        assert bpp_solve(P).refined_with_lsqr
        assert not bpp_solve(P, SolverOptions(mode=Mode.NormalEquationsOnly)).refined_with_lsqr
        assert bpp_solve(P).condition is not None

    def test_adaptive_threshold(self, rng):
        P = full_rank_problem(rng, 30, 10, 1.0, max_cond=10)
        loose = bpp_solve(P, SolverOptions(mode=Mode.Adaptive, adaptive_error_threshold=0.5))
        tight = bpp_solve(P, SolverOptions(mode=Mode.Adaptive, adaptive_error_threshold=1e-300))
        assert not loose.refined_with_lsqr
        assert tight.refined_with_lsqr or len(tight.F) == 0

    def test_iteration_limit(self):
        P, _ = degenerate_problem(0)
        with pytest.raises(IterationLimit):
            bpp_solve(P, SolverOptions(max_iterations=0))

    def test_lsqr_fallback_on_rank_deficient_subproblem(self):
        # duplicated column: the 2x2 Gram block is singular
        A = from_dense([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]])
        r = bpp_solve(Problem(A, [1.0, 1.0, 1.0, 2.0]), SolverOptions(max_iterations=100))
        assert r.kkt.min_x >= 0
        assert r.kkt.min_y >= -1e-10

    def test_options_validated(self):
        with pytest.raises(ValueError):
            SolverOptions(zero_tolerance=-1.0)
        with pytest.raises(ValueError):
            SolverOptions(adaptive_error_threshold=1.0)

    def test_mode_consistency(self, rng):
        for _ in range(20):
            m = int(rng.integers(10, 40))
            n = int(rng.integers(2, m))
            P = full_rank_problem(rng, m, n, 0.5, max_cond=1e3)
            a = bpp_solve(P, SolverOptions(mode=Mode.NormalEquationsOnly))
            b = bpp_solve(P, SolverOptions(mode=Mode.LsqrFinal))
            assert np.array_equal(a.F, b.F)
            np.testing.assert_allclose(a.x, b.x, rtol=1e-8, atol=1e-8 * np.abs(b.x).max())

    def test_deterministic(self, rng):
        P = full_rank_problem(rng, 40, 30, 0.3)
        a, b = bpp_solve(P), bpp_solve(P)
        assert np.array_equal(a.x, b.x) and a.pivot_iterations == b.pivot_iterations


class TestDegenerate:
    def test_clamp_lets_degenerate_problems_terminate(self):
        for seed in range(20):
            P, x_star = degenerate_problem(seed)
            r = bpp_solve(P)
            np.testing.assert_allclose(r.x, x_star, atol=1e-10)

    def test_without_clamp_some_cycle(self):
        hit = 0
        for seed in range(20):
            P, _ = degenerate_problem(seed)
            try:
                bpp_solve(P, SolverOptions(zero_tolerance=0.0))
            except IterationLimit:
                hit += 1
        assert hit > 0


class TestKkt:
    def test_identity_exact(self):
        P = Problem(identity(2), [3.0, -2.0])
        k = kkt_residuals(P, [3.0, 0.0], [0.0, 2.0])
        assert k.min_x >= 0 and k.max_complementarity == 0.0 and k.primal_residual_norm == 0

    def test_zero_solution(self):
        A = from_dense([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
        P = Problem(A, [-1.0, -1.0, 0.0])
        k = kkt_residuals(P, [0.0, 0.0], [1.0, 1.0])
        assert k.min_y >= 0

    def test_small_example(self, small_example):
        k = kkt_residuals(small_example, [0.0, 0.5], [1.5, 0.0])
        assert k.min_x == 0 and k.min_y == 0 and k.max_complementarity == 0


class TestOracle:
    def test_identity(self):
        np.testing.assert_allclose(oracle_nnls(Problem(identity(2), [3.0, -2.0])).x, [3, 0])

    def test_small_example(self, small_example):
        np.testing.assert_allclose(oracle_nnls(small_example).x, [0, 0.5], atol=1e-15)

    def test_single_column(self):
        r = oracle_nnls(Problem(from_dense([[1.0], [1.0]]), [1.0, 3.0]))
        np.testing.assert_allclose(r.x, [2.0])

    def test_too_large(self):
        A = from_dense(np.vstack([np.eye(21), np.ones((1, 21))]))
        with pytest.raises(TooLarge):
            oracle_nnls(Problem(A, np.ones(22)))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_matches_solver(self, seed):
        rng = np.random.default_rng(seed)
        m = int(rng.integers(2, 13))
        n = int(rng.integers(1, min(m, 8) + 1))
        P = full_rank_problem(rng, m, n, [1.0, 0.5][seed % 2])
        ours, ref = bpp_solve(P), oracle_nnls(P)
        assert abs(ours.objective - ref.objective) <= 1e-10 * (1 + ref.objective)
        strong = ref.x > 1e-6
        assert np.array_equal(ours.x[strong] > 0, strong[strong])
        assert np.all(ours.x[ref.x == 0] <= 1e-6)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1.0, 0.1, 0.01]))
def test_kkt_property(seed, density):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 60))
    m = int(rng.integers(n + 1, n + 30))
    P = full_rank_problem(rng, m, n, density)
    r = bpp_solve(P)
    an = sparsemat.norm1(P.A)
    bn = np.abs(P.b).max()
    assert r.kkt.min_x >= 0
    assert r.kkt.min_y >= -1e-8 * an * bn
    assert r.kkt.max_complementarity <= 1e-8 * an**2 * bn
    assert np.all(r.y[r.F] == 0)
