import numpy as np
import pytest

from bppnnls.nnls import Problem
from bppnnls.sparsemat import from_dense


def random_sparse_dense(rng, m, n, density):
    """Dense array with Bernoulli(density) standard-normal entries."""
    return rng.standard_normal((m, n)) * (rng.random((m, n)) < density)


def random_spd(rng, n, density=0.3, spread=2.0):
    """B^T B + n I with column-scaled sparse B."""
    B = random_sparse_dense(rng, n + 3, n, density)
    B = B * np.exp(rng.uniform(-spread, spread, n))
    return B.T @ B + n * np.eye(n)


def full_rank_problem(rng, m, n, density, max_cond=1e4):
    """Random problem whose dense A has condition number at most max_cond."""
    while True:
        A = random_sparse_dense(rng, m, n, density)
        A[np.arange(n), np.arange(n)] += 1.0 + np.sqrt(density * m)
        if np.linalg.cond(A) <= max_cond:
            return Problem(from_dense(A), rng.standard_normal(m))


def degenerate_problem(seed, k=6, extra=6, m=30):
    """Identity block padded with correlated columns; optimum has exact zeros.

    b = A x* + r with r orthogonal to range(A), so the optimal dual is zero
    everywhere and every zero of x* is degenerate.
    """
    rng = np.random.default_rng(seed)
    n = k + extra
    top = np.hstack([np.eye(k), np.zeros((k, extra))])
    base = rng.standard_normal((m - k, 3))
    corr = base @ rng.standard_normal((3, extra)) + 0.1 * rng.standard_normal((m - k, extra))
    A = np.vstack([top, np.hstack([0.1 * rng.standard_normal((m - k, k)), corr])])
    x = np.abs(rng.standard_normal(n)) + 0.5
    x[rng.random(n) < 0.5] = 0.0
    Q, _ = np.linalg.qr(A, mode="complete")
    r = 0.3 * Q[:, n:] @ rng.standard_normal(m - n)
    return Problem(from_dense(A), A @ x + r), x


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_example():
    """3x2 problem with solution (0, 0.5), dual (1.5, 0), objective 0.75."""
    A = from_dense([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    return Problem(A, np.array([-1.0, 1.0, 0.0]))
