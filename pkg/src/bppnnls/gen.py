"""Seeded test problems.

``gen_p`` builds dense m x n problems A = Y D Z^T with orthogonal Y, Z made
from Householder reflections and a prescribed singular value pattern: ceil(n/d)
distinct values spaced geometrically from 1 down to 1/cond, each repeated d
times.  The right-hand side is A x_true plus a residual orthogonal to range(A),
so x_true (strictly positive) is the exact NNLS solution.  The residual size
is ``residual_ratio * ||A x_true||``; a large residual makes the least-squares
solution itself sensitive at order cond^2 * eps * ||r|| / (||A|| ||x||), which
puts a floor under the error of every solver, accurate or not.

``gen_random_sparse`` draws Bernoulli(density) standard-normal entries and
adds a scaled identity in the top n rows so A keeps full column rank.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SpecInvalid
from .nnls import Problem
from .sparsemat import from_arrays, from_dense


@dataclass(frozen=True)
class GeneratorSpec:
    m: int
    n: int
    d: int = 1
    cond_target: float = 1.0
    seed: int = 0
    density: float = 1.0
    residual_ratio: float = 0.01  # P family only: ||r|| / ||A x_true||

    def validate(self) -> None:
        if not (self.n >= 1 and self.m > self.n):
            raise SpecInvalid(f"need m > n >= 1, got m={self.m}, n={self.n}")
        if self.d < 1:
            raise SpecInvalid("duplication factor d must be >= 1")
        if not (math.isfinite(self.cond_target) and self.cond_target >= 1.0):
            raise SpecInvalid("cond_target must be a finite number >= 1")
        if not (0.0 < self.density <= 1.0):
            raise SpecInvalid("density must lie in (0, 1]")
        if not (math.isfinite(self.residual_ratio) and self.residual_ratio >= 0.0):
            raise SpecInvalid("residual_ratio must be finite and >= 0")
        if not (0 <= self.seed < 2**64):
            raise SpecInvalid("seed must be an unsigned 64-bit integer")


@dataclass
class GeneratedProblem:
    problem: Problem
    x_true: np.ndarray
    singular_values: np.ndarray
    achieved_cond: float  # nan when the family does not control it
    has_x_true: bool = True


def householder_product(k: int, rng: np.random.Generator) -> np.ndarray:
    """Dense orthogonal k x k matrix H_1 H_2 ... H_k from Gaussian reflectors."""
    Q = np.eye(k)
    for _ in range(k):
        v = rng.standard_normal(k)
        Q -= np.outer(Q @ v, v) * (2.0 / (v @ v))
    return Q


def p_singular_values(n: int, d: int, cond: float) -> np.ndarray:
    groups = -(-n // d)
    if groups == 1:
        distinct = np.ones(1)
    else:
        distinct = np.geomspace(1.0, 1.0 / cond, groups)
    return np.repeat(distinct, d)[:n]


def gen_p(spec: GeneratorSpec) -> GeneratedProblem:
    """Dense problem with controlled condition number and known solution."""
    spec.validate()
    m, n = spec.m, spec.n
    if -(-n // spec.d) == 1 and spec.cond_target > 1.0:
        raise SpecInvalid("a single distinct singular value cannot reach cond > 1")
    rng = np.random.default_rng(spec.seed)
    Y = householder_product(m, rng)
    Z = householder_product(n, rng)
    sigma = p_singular_values(n, spec.d, spec.cond_target)
    A = (Y[:, :n] * sigma) @ Z.T

    x_true = 1.0 + np.arange(n) / n
    Ax = A @ x_true
    c = rng.standard_normal(m - n)
    c *= spec.residual_ratio * np.linalg.norm(Ax) / np.linalg.norm(c)
    b = Ax + Y[:, n:] @ c

    return GeneratedProblem(
        problem=Problem(from_dense(A), b),
        x_true=x_true,
        singular_values=sigma,
        achieved_cond=float(sigma.max() / sigma.min()),
    )


def guard_scale(spec: GeneratorSpec) -> float:
    # comparable to the typical column norm of the random part
    return 1.0 + math.sqrt(spec.density * spec.m)


def random_sparse_triplets(spec: GeneratorSpec):
    """(rows, cols, vals) of the random part, column-major, then the guard diagonal."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    keep = rng.random((spec.n, spec.m)) < spec.density  # row j of keep is column j
    cols, rows = np.nonzero(keep)
    vals = rng.standard_normal(len(rows))
    diag = np.arange(spec.n)
    random_part = (rows, cols, vals)
    guard = (diag, diag, np.full(spec.n, guard_scale(spec)))
    return random_part, guard, rng


def gen_random_sparse(spec: GeneratorSpec) -> GeneratedProblem:
    """Random sparse full-rank problem with a random right-hand side."""
    (r, c, v), (gr, gc, gv), rng = random_sparse_triplets(spec)
    A = from_arrays(
        spec.m,
        spec.n,
        np.concatenate([r, gr]),
        np.concatenate([c, gc]),
        np.concatenate([v, gv]),
    )
    b = rng.standard_normal(spec.m)
    return GeneratedProblem(
        problem=Problem(A, b),
        x_true=np.zeros(spec.n),
        singular_values=np.zeros(0),
        achieved_cond=math.nan,
        has_x_true=False,
    )
