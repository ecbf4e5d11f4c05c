"""Sparse Cholesky factorization M = L L^T and a 1-norm condition estimate.

The factorization is up-looking: row k of L is obtained from a sparse
triangular solve whose nonzero pattern is the reach of column k in the
elimination tree.  A symbolic pass (elimination tree, column counts) sizes L
exactly before the numeric pass runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import DimensionMismatch, NotPositiveDefinite
from .sparsemat import SparseMatrix, as_vector, from_arrays

MACHINE_EPSILON = 2.0**-52
PIVOT_FLOOR = 1e-300


@dataclass(frozen=True)
class CholeskyFactor:
    L: SparseMatrix
    perm: np.ndarray | None = None  # perm[new] = old

    @property
    def dimension(self) -> int:
        return self.L.ncols


@dataclass(frozen=True)
class ConditionEstimate:
    kappa: float
    predicted_relative_error: float

    @classmethod
    def from_kappa(cls, kappa: float) -> "ConditionEstimate":
        kappa = max(1.0, float(kappa))
        return cls(kappa, kappa * MACHINE_EPSILON)


@numba.njit(cache=True)
def _etree(n, Cp, Ci):
    parent = np.full(n, -1, dtype=np.int64)
    ancestor = np.full(n, -1, dtype=np.int64)
    for k in range(n):
        for p in range(Cp[k], Cp[k + 1]):
            i = Ci[p]
            while i != -1 and i < k:
                inext = ancestor[i]
                ancestor[i] = k
                if inext == -1:
                    parent[i] = k
                i = inext
    return parent


@numba.njit(cache=True)
def _ereach(k, Cp, Ci, parent, s, mark):
    # pattern of L[k, :k] in topological order, left in s[top:]
    n = len(parent)
    top = n
    mark[k] = k
    for p in range(Cp[k], Cp[k + 1]):
        i = Ci[p]
        if i > k:
            continue
        ln = 0
        while mark[i] != k:
            s[ln] = i
            ln += 1
            mark[i] = k
            i = parent[i]
        while ln > 0:
            top -= 1
            ln -= 1
            s[top] = s[ln]
    return top


@numba.njit(cache=True)
def _colcounts(n, Cp, Ci, parent):
    counts = np.ones(n, dtype=np.int64)
    s = np.empty(n, dtype=np.int64)
    mark = np.full(n, -1, dtype=np.int64)
    for k in range(n):
        top = _ereach(k, Cp, Ci, parent, s, mark)
        for t in range(top, n):
            counts[s[t]] += 1
    return counts


@numba.njit(cache=True)
def _numeric(n, Cp, Ci, Cx, parent, Lp, floor):
    nz = Lp[n]
    Li = np.empty(nz, dtype=np.int64)
    Lx = np.empty(nz)
    nxt = Lp[:n].copy()
    x = np.zeros(n)
    s = np.empty(n, dtype=np.int64)
    mark = np.full(n, -1, dtype=np.int64)
    for k in range(n):
        top = _ereach(k, Cp, Ci, parent, s, mark)
        x[k] = 0.0
        for p in range(Cp[k], Cp[k + 1]):
            if Ci[p] <= k:
                x[Ci[p]] += Cx[p]
        d = x[k]
        x[k] = 0.0
        for t in range(top, n):
            i = s[t]
            lki = x[i] / Lx[Lp[i]]
            x[i] = 0.0
            for p in range(Lp[i] + 1, nxt[i]):
                x[Li[p]] -= Lx[p] * lki
            d -= lki * lki
            q = nxt[i]
            nxt[i] += 1
            Li[q] = k
            Lx[q] = lki
        if not (d >= floor) or not np.isfinite(d):
            return Li, Lx, k, d
        q = nxt[k]
        nxt[k] += 1
        Li[q] = k
        Lx[q] = np.sqrt(d)
    return Li, Lx, -1, 0.0


@numba.njit(cache=True)
def _lsolve(n, Lp, Li, Lx, x):
    for j in range(n):
        x[j] /= Lx[Lp[j]]
        xj = x[j]
        for p in range(Lp[j] + 1, Lp[j + 1]):
            x[Li[p]] -= Lx[p] * xj


@numba.njit(cache=True)
def _ltsolve(n, Lp, Li, Lx, x):
    for j in range(n - 1, -1, -1):
        s = x[j]
        for p in range(Lp[j] + 1, Lp[j + 1]):
            s -= Lx[p] * x[Li[p]]
        x[j] = s / Lx[Lp[j]]


def symmetric_permute(M: SparseMatrix, perm) -> SparseMatrix:
    """C = P M P^T with C[i, j] = M[perm[i], perm[j]]."""
    perm = np.asarray(perm, dtype=np.int64)
    n = M.ncols
    if sorted(perm.tolist()) != list(range(n)):
        raise ValueError("perm is not a permutation of 0..n-1")
    pinv = np.empty(n, dtype=np.int64)
    pinv[perm] = np.arange(n)
    cols = np.repeat(np.arange(n), np.diff(M.colptr))
    return from_arrays(n, n, pinv[M.rowind], pinv[cols], M.values)


def factorize(M: SparseMatrix, perm=None) -> CholeskyFactor:
    """Cholesky factor of a symmetric positive definite CSC matrix.

    Only the upper triangle of M is read.  ``perm`` is an optional
    fill-reducing ordering (new -> old); the default is the natural order.

    Raises NotPositiveDefinite when a pivot is nonpositive, below 1e-300, or
    not finite.
    """
    if M.nrows != M.ncols:
        raise DimensionMismatch(f"matrix is {M.nrows}x{M.ncols}, not square")
    C = M if perm is None else symmetric_permute(M, perm)
    n = C.ncols
    parent = _etree(n, C.colptr, C.rowind)
    counts = _colcounts(n, C.colptr, C.rowind, parent)
    Lp = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=Lp[1:])
    Li, Lx, bad, pivot = _numeric(
        n, C.colptr, C.rowind, C.values, parent, Lp, PIVOT_FLOOR
    )
    if bad >= 0:
        col = int(bad) if perm is None else int(np.asarray(perm)[bad])
        raise NotPositiveDefinite(col, float(pivot))
    L = SparseMatrix(n, n, Lp, Li, Lx)
    return CholeskyFactor(L, None if perm is None else np.asarray(perm, dtype=np.int64))


def solve(F: CholeskyFactor, rhs) -> np.ndarray:
    """x with L L^T x = rhs (undoing the ordering if one was used)."""
    n = F.dimension
    rhs = as_vector(rhs, n, "rhs")
    L = F.L
    x = rhs.copy() if F.perm is None else rhs[F.perm]
    _lsolve(n, L.colptr, L.rowind, L.values, x)
    _ltsolve(n, L.colptr, L.rowind, L.values, x)
    if F.perm is None:
        return x
    out = np.empty(n)
    out[F.perm] = x
    return out


def _sign(v):
    return np.where(v >= 0.0, 1.0, -1.0)


def inverse_norm1_estimate(F: CholeskyFactor, max_iter: int = 5) -> float:
    """Lower bound on ||M^{-1}||_1 by Hager's method with Higham's safeguards.

    M is symmetric, so the transpose solves needed by the method are the same
    triangular solves.
    """
    n = F.dimension
    if n == 0:
        return 0.0
    x = np.full(n, 1.0 / n)
    y = solve(F, x)
    if n == 1:
        return float(abs(y[0]))
    est = float(np.abs(y).sum())
    xi = _sign(y)
    z = solve(F, xi)
    j = int(np.argmax(np.abs(z)))
    for _ in range(1, max_iter):
        if np.abs(z).max() <= z @ x:
            break
        x = np.zeros(n)
        x[j] = 1.0
        y = solve(F, x)
        new = float(np.abs(y).sum())
        new_xi = _sign(y)
        if new <= est or np.array_equal(new_xi, xi):
            est = max(est, new)
            break
        est, xi = new, new_xi
        z = solve(F, xi)
        jlast, j = j, int(np.argmax(np.abs(z)))
        if abs(z[jlast]) == abs(z[j]):
            break
    # alternating test vector catches cases the power-like iteration misses
    alt = np.arange(n, dtype=np.float64)
    alt = (1.0 + alt / (n - 1)) * np.where(alt % 2 == 0, 1.0, -1.0)
    est_alt = 2.0 * float(np.abs(solve(F, alt)).sum()) / (3.0 * n)
    return max(est, est_alt)


def condest_1norm(F: CholeskyFactor, norm1_M: float) -> ConditionEstimate:
    """Estimated 1-norm condition number of M = L L^T, given ||M||_1."""
    return ConditionEstimate.from_kappa(norm1_M * inverse_norm1_estimate(F))
