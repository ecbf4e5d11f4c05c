import math

import numpy as np
import pytest

from bppnnls import sparsemat
from bppnnls.cholesky import factorize
from bppnnls.errors import SpecInvalid
from bppnnls.gen import GeneratorSpec, gen_p, gen_random_sparse, random_sparse_triplets
from bppnnls.nnls import bpp_solve


def test_cond_one():
    g = gen_p(GeneratorSpec(4, 2, 1, 1.0, seed=3))
    assert g.singular_values[0] == g.singular_values[1]
    assert g.achieved_cond == 1.0


def test_80x70_dup4_shape():
    g = gen_p(GeneratorSpec(80, 70, 4, 1e4, seed=1))
    assert g.problem.A.shape == (80, 70)
    assert len(np.unique(g.singular_values)) == 18
    assert g.singular_values.max() / g.singular_values.min() == pytest.approx(1e4, rel=1e-12)
    counts = np.unique(g.singular_values, return_counts=True)[1]
    assert sorted(counts.tolist()) == [2] + [4] * 17


def test_svd_matches_requested_cond():
    g = gen_p(GeneratorSpec(6, 3, 1, 100.0, seed=7))
    s = np.linalg.svd(g.problem.A.to_dense(), compute_uv=False)
    assert s[0] / s[-1] == pytest.approx(100.0, rel=0.01)


@pytest.mark.parametrize("m, n, d, cond", [(12, 8, 1, 50.0), (40, 33, 4, 1e3), (30, 20, 3, 7.0)])
def test_singular_value_multiset(m, n, d, cond):
    g = gen_p(GeneratorSpec(m, n, d, cond, seed=11))
    s = np.linalg.svd(g.problem.A.to_dense(), compute_uv=False)
    np.testing.assert_allclose(np.sort(s), np.sort(g.singular_values), rtol=1e-10)


@pytest.mark.parametrize("ratio", [0.01, 0.25])
def test_residual_orthogonal_to_range(ratio):
    g = gen_p(GeneratorSpec(50, 40, 2, 1e3, seed=5, residual_ratio=ratio))
    A = g.problem.A
    r = g.problem.b - sparsemat.matvec(A, g.x_true)
    Ax = sparsemat.matvec(A, g.x_true)
    assert np.linalg.norm(r) == pytest.approx(ratio * np.linalg.norm(Ax), rel=1e-10)
    Atr = sparsemat.rmatvec(A, r)
    assert np.abs(Atr).max() <= 1e-12 * sparsemat.norm1(A) * np.abs(r).max()


def test_solver_recovers_x_true():
    cond = 1e3
    g = gen_p(GeneratorSpec(40, 30, 2, cond, seed=2))
    x = bpp_solve(g.problem).x
    err = np.linalg.norm(x - g.x_true) / np.linalg.norm(g.x_true)
    assert err <= cond**2 * 2.0**-52


def test_x_true_positive():
    g = gen_p(GeneratorSpec(10, 5, 1, 10.0, seed=0))
    assert np.all(g.x_true > 0)


@pytest.mark.parametrize(
    "kw",
    [
        dict(m=3, n=5),
        dict(m=5, n=5),
        dict(m=5, n=3, d=0),
        dict(m=5, n=3, cond_target=0.5),
        dict(m=5, n=3, density=0.0),
        dict(m=5, n=3, seed=-1),
        dict(m=5, n=2, d=4, cond_target=10.0),
    ],
)
def test_invalid_specs(kw):
    with pytest.raises(SpecInvalid):
        gen_p(GeneratorSpec(**kw))


def test_random_sparse_full_density():
    g = gen_random_sparse(GeneratorSpec(5, 3, density=1.0, seed=4))
    assert g.problem.A.nnz == 15
    assert not g.has_x_true and math.isnan(g.achieved_cond)


def test_random_sparse_deterministic():
    spec = GeneratorSpec(30, 20, density=0.2, seed=9)
    (r1, c1, v1), _, _ = random_sparse_triplets(spec)
    (r2, c2, v2), _, _ = random_sparse_triplets(spec)
    assert np.array_equal(r1, r2) and np.array_equal(c1, c2) and np.array_equal(v1, v2)
    a, b = gen_random_sparse(spec), gen_random_sparse(spec)
    assert a.problem.A.same_as(b.problem.A) and np.array_equal(a.problem.b, b.problem.b)


def test_p_deterministic():
    spec = GeneratorSpec(20, 10, 2, 100.0, seed=9)
    a, b = gen_p(spec), gen_p(spec)
    assert a.problem.A.same_as(b.problem.A) and np.array_equal(a.problem.b, b.problem.b)


def test_random_sparse_density_concentration():
    counts = []
    for seed in range(5):
        (rows, _, _), _, _ = random_sparse_triplets(GeneratorSpec(500, 490, density=0.01, seed=seed))
        counts.append(len(rows))
        assert abs(len(rows) - 2450) <= 0.2 * 2450
    assert abs(np.mean(counts) - 2450) <= 0.05 * 2450


@pytest.mark.parametrize("density", [1.0, 0.1, 0.01])
def test_random_sparse_gram_factorizes(density):
    for seed in range(5):
        g = gen_random_sparse(GeneratorSpec(60, 50, density=density, seed=seed))
        factorize(sparsemat.gram(g.problem.A))
