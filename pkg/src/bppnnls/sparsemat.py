"""Compressed sparse column storage and the kernels built on it.

Everything here is 0-based.  Matrices are immutable once constructed: the
index and value arrays are flagged read-only, so a SparseMatrix may be shared
freely between solves.

Dense vectors are plain 1-D float64 numpy arrays; column selections are
strictly increasing 1-D int64 arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numba
import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange

_gram_calls = 0


def gram_call_count() -> int:
    """Number of times :func:`gram` has run in this process."""
    return _gram_calls


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    nrows: int
    ncols: int
    colptr: np.ndarray
    rowind: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "colptr", _frozen(self.colptr, np.int64))
        object.__setattr__(self, "rowind", _frozen(self.rowind, np.int64))
        object.__setattr__(self, "values", _frozen(self.values, np.float64))
        _check_csc(self)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def nnz(self) -> int:
        return int(self.colptr[-1])

    def column(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.colptr[j], self.colptr[j + 1]
        return self.rowind[lo:hi], self.values[lo:hi]

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.nrows, self.ncols))
        cols = np.repeat(np.arange(self.ncols), np.diff(self.colptr))
        out[self.rowind, cols] = self.values
        return out

    def to_triplets(self) -> list[tuple[int, int, float]]:
        cols = np.repeat(np.arange(self.ncols), np.diff(self.colptr))
        return [
            (int(i), int(j), float(v))
            for i, j, v in zip(self.rowind, cols, self.values)
        ]

    def same_as(self, other: "SparseMatrix") -> bool:
        """Structural and bitwise value equality."""
        return (
            self.shape == other.shape
            and np.array_equal(self.colptr, other.colptr)
            and np.array_equal(self.rowind, other.rowind)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return f"SparseMatrix({self.nrows}x{self.ncols}, nnz={self.nnz})"


def _check_csc(A: SparseMatrix) -> None:
    if A.nrows < 0 or A.ncols < 0:
        raise ValueError("negative dimension")
    cp, ri = A.colptr, A.rowind
    if cp.shape != (A.ncols + 1,) or cp[0] != 0:
        raise ValueError("colptr must have ncols+1 entries starting at 0")
    if np.any(np.diff(cp) < 0):
        raise ValueError("colptr must be nondecreasing")
    if cp[-1] != len(ri) or len(ri) != len(A.values):
        raise ValueError("colptr[-1], len(rowind) and len(values) disagree")
    if len(ri) and (ri.min() < 0 or ri.max() >= A.nrows):
        raise IndexOutOfRange("row index outside matrix")
    if not np.all(np.isfinite(A.values)):
        raise ValueError("stored values must be finite")
    # strictly increasing rows within each column
    if len(ri) > 1:
        step = np.diff(ri) > 0
        starts = np.zeros(len(ri), dtype=bool)
        starts[cp[1:-1][cp[1:-1] < len(ri)]] = True
        if not np.all(step | starts[1:]):
            raise ValueError("row indices must be strictly increasing within a column")


def from_triplets(
    nrows: int, ncols: int, triplets: Iterable[Sequence[float]]
) -> SparseMatrix:
    """Assemble a CSC matrix from (row, col, value) triplets.

    Duplicate coordinates are summed.  Raises IndexOutOfRange when a triplet
    falls outside the declared shape.
    """
    t = list(triplets)
    if t:
        rows = np.array([int(r) for r, _, _ in t], dtype=np.int64)
        cols = np.array([int(c) for _, c, _ in t], dtype=np.int64)
        vals = np.array([float(v) for _, _, v in t], dtype=np.float64)
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
        vals = np.zeros(0)
    return from_arrays(nrows, ncols, rows, cols, vals)


def from_arrays(nrows, ncols, rows, cols, vals) -> SparseMatrix:
    """Vectorized form of :func:`from_triplets`."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.float64)
    if len(rows) and (
        rows.min() < 0 or cols.min() < 0 or rows.max() >= nrows or cols.max() >= ncols
    ):
        raise IndexOutOfRange(f"triplet outside declared {nrows}x{ncols} shape")
    order = np.lexsort((rows, cols))
    rows, cols, vals = rows[order], cols[order], vals[order]
    if len(rows):
        first = np.ones(len(rows), dtype=bool)
        first[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
        starts = np.flatnonzero(first)
        vals = np.add.reduceat(vals, starts)
        rows, cols = rows[starts], cols[starts]
    colptr = np.zeros(ncols + 1, dtype=np.int64)
    np.cumsum(np.bincount(cols, minlength=ncols), out=colptr[1:])
    return SparseMatrix(nrows, ncols, colptr, rows, vals)


def from_dense(D) -> SparseMatrix:
    """CSC copy of a dense array, dropping exact zeros."""
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2:
        raise ValueError("expected a 2-D array")
    cols, rows = np.nonzero(D.T)
    return from_arrays(D.shape[0], D.shape[1], rows, cols, D[rows, cols])


def identity(n: int) -> SparseMatrix:
    return SparseMatrix(n, n, np.arange(n + 1), np.arange(n), np.ones(n))


def as_vector(v, length: int | None = None, name: str = "vector") -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatch(f"{name} must be one-dimensional")
    if length is not None and len(v) != length:
        raise DimensionMismatch(f"{name} has length {len(v)}, expected {length}")
    return v


def as_selection(indices, ncols: int) -> np.ndarray:
    """Validate a column selection: strictly increasing indices below ncols."""
    sel = np.asarray(indices, dtype=np.int64).reshape(-1)
    if len(sel):
        if sel[0] < 0 or sel[-1] >= ncols:
            raise IndexOutOfRange(f"selection outside 0..{ncols - 1}")
        if np.any(np.diff(sel) <= 0):
            raise ValueError("column selection must be strictly increasing")
    return sel


# ---------------------------------------------------------------------------
# kernels


@numba.njit(cache=True)
def _matvec(ncols, nrows, colptr, rowind, values, v):
    out = np.zeros(nrows)
    for j in range(ncols):
        vj = v[j]
        if vj == 0.0:
            continue
        for p in range(colptr[j], colptr[j + 1]):
            out[rowind[p]] += values[p] * vj
    return out


@numba.njit(cache=True)
def _rmatvec(ncols, colptr, rowind, values, u):
    out = np.zeros(ncols)
    for j in range(ncols):
        s = 0.0
        for p in range(colptr[j], colptr[j + 1]):
            s += values[p] * u[rowind[p]]
        out[j] = s
    return out


def matvec(A: SparseMatrix, v) -> np.ndarray:
    """A @ v."""
    v = as_vector(v, A.ncols, "v")
    return _matvec(A.ncols, A.nrows, A.colptr, A.rowind, A.values, v)


def rmatvec(A: SparseMatrix, u) -> np.ndarray:
    """A.T @ u as one dot product per column; A.T is never built."""
    u = as_vector(u, A.nrows, "u")
    return _rmatvec(A.ncols, A.colptr, A.rowind, A.values, u)


@numba.njit(cache=True)
def _gram_upper(nrows, ncols, colptr, rowind, values):
    # upper triangle (i <= j) of A^T A, column by column, structural
    # overlaps only; exact cancellation to 0.0 is kept
    w = np.zeros(nrows)
    mark = np.full(nrows, -1, dtype=np.int64)
    cap = max(16, 2 * ncols)
    ui = np.empty(cap, dtype=np.int64)
    uj = np.empty(cap, dtype=np.int64)
    uv = np.empty(cap)
    k = 0
    for j in range(ncols):
        for p in range(colptr[j], colptr[j + 1]):
            w[rowind[p]] = values[p]
            mark[rowind[p]] = j
        for i in range(j + 1):
            hit = False
            s = 0.0
            for p in range(colptr[i], colptr[i + 1]):
                r = rowind[p]
                if mark[r] == j:
                    hit = True
                    s += values[p] * w[r]
            if hit:
                if k == cap:
                    cap *= 2
                    ui2 = np.empty(cap, dtype=np.int64)
                    uj2 = np.empty(cap, dtype=np.int64)
                    uv2 = np.empty(cap)
                    ui2[:k] = ui[:k]
                    uj2[:k] = uj[:k]
                    uv2[:k] = uv[:k]
                    ui, uj, uv = ui2, uj2, uv2
                ui[k] = i
                uj[k] = j
                uv[k] = s
                k += 1
    return ui[:k], uj[:k], uv[:k]


def gram(A: SparseMatrix) -> SparseMatrix:
    """A^T A from pairwise column dot products, both triangles stored.

    Each off-diagonal product is computed once and mirrored, so the result is
    exactly symmetric.
    """
    global _gram_calls
    _gram_calls += 1
    ui, uj, uv = _gram_upper(A.nrows, A.ncols, A.colptr, A.rowind, A.values)
    off = ui != uj
    rows = np.concatenate([ui, uj[off]])
    cols = np.concatenate([uj, ui[off]])
    vals = np.concatenate([uv, uv[off]])
    order = np.lexsort((rows, cols))
    colptr = np.zeros(A.ncols + 1, dtype=np.int64)
    np.cumsum(np.bincount(cols, minlength=A.ncols), out=colptr[1:])
    return SparseMatrix(A.ncols, A.ncols, colptr, rows[order], vals[order])


@numba.njit(cache=True)
def _principal(n, colptr, rowind, values, sel):
    pos = np.full(n, -1, dtype=np.int64)
    for k in range(len(sel)):
        pos[sel[k]] = k
    cp = np.zeros(len(sel) + 1, dtype=np.int64)
    for k in range(len(sel)):
        c = 0
        j = sel[k]
        for p in range(colptr[j], colptr[j + 1]):
            if pos[rowind[p]] >= 0:
                c += 1
        cp[k + 1] = cp[k] + c
    ri = np.empty(cp[-1], dtype=np.int64)
    vx = np.empty(cp[-1])
    q = 0
    for k in range(len(sel)):
        j = sel[k]
        for p in range(colptr[j], colptr[j + 1]):
            r = pos[rowind[p]]
            if r >= 0:
                ri[q] = r
                vx[q] = values[p]
                q += 1
    return cp, ri, vx


def gram_submatrix(G: SparseMatrix, sel) -> SparseMatrix:
    """Principal submatrix G[sel, sel] of a cached Gram matrix."""
    if G.nrows != G.ncols:
        raise DimensionMismatch("Gram matrix must be square")
    sel = as_selection(sel, G.ncols)
    cp, ri, vx = _principal(G.ncols, G.colptr, G.rowind, G.values, sel)
    return SparseMatrix(len(sel), len(sel), cp, ri, vx)


def select_columns(A: SparseMatrix, sel) -> SparseMatrix:
    """A[:, sel]."""
    sel = as_selection(sel, A.ncols)
    lo, hi = A.colptr[sel], A.colptr[sel + 1]
    counts = hi - lo
    colptr = np.zeros(len(sel) + 1, dtype=np.int64)
    np.cumsum(counts, out=colptr[1:])
    if colptr[-1]:
        idx = np.repeat(lo - colptr[:-1], counts) + np.arange(colptr[-1])
    else:
        idx = np.zeros(0, dtype=np.int64)
    return SparseMatrix(A.nrows, len(sel), colptr, A.rowind[idx], A.values[idx])


def norm1(A: SparseMatrix) -> float:
    """Maximum absolute column sum."""
    if A.ncols == 0 or A.nnz == 0:
        return 0.0
    sums = np.add.reduceat(np.abs(A.values), np.minimum(A.colptr[:-1], A.nnz - 1))
    sums[np.diff(A.colptr) == 0] = 0.0
    return float(sums.max())


def norm_fro(A: SparseMatrix) -> float:
    return float(np.sqrt(np.dot(A.values, A.values)))
