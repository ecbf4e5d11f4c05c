"""Matrix Market and plain-text vector files.

Files are 1-based; everything in memory is 0-based.  Values are written with
17 significant digits, which round-trips every double exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, UnsupportedFormat
from .sparsemat import SparseMatrix, as_vector, from_arrays

_FORMATS = {"coordinate", "array"}
_FIELDS = {"real", "integer"}
_SYMMETRIES = {"general", "symmetric"}
_UNSUPPORTED = {"complex", "pattern", "hermitian", "skew-symmetric"}


@dataclass(frozen=True)
class MatrixMarketHeader:
    object: str
    format: str
    field: str
    symmetry: str

    @classmethod
    def parse(cls, line: str) -> "MatrixMarketHeader":
        tokens = line.strip().lower().split()
        if len(tokens) != 5 or tokens[0] != "%%matrixmarket":
            raise ParseError(f"bad Matrix Market banner: {line.strip()!r}")
        obj, fmt, field, sym = tokens[1:]
        for tok in (fmt, field, sym):
            if tok in _UNSUPPORTED:
                raise UnsupportedFormat(f"Matrix Market '{tok}' matrices are not supported")
        if obj != "matrix" or fmt not in _FORMATS or field not in _FIELDS or sym not in _SYMMETRIES:
            raise ParseError(f"bad Matrix Market banner: {line.strip()!r}")
        return cls(obj, fmt, field, sym)


def _data_lines(lines):
    for lineno, line in lines:
        s = line.strip()
        if s and not s.startswith("%"):
            yield lineno, s.split()


def _ints(tokens, count, lineno):
    if len(tokens) != count:
        raise ParseError(f"line {lineno}: expected {count} integers")
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise ParseError(f"line {lineno}: non-integer size entry") from None


def _real(token, lineno):
    try:
        v = float(token)
    except ValueError:
        raise ParseError(f"line {lineno}: non-numeric value {token!r}") from None
    if not math.isfinite(v):
        raise ParseError(f"line {lineno}: non-finite value {token!r}")
    return v


def read_matrix_market(path) -> SparseMatrix:
    """Read a real/integer, general/symmetric Matrix Market file into CSC."""
    with open(path, "r") as fh:
        text = fh.read().splitlines()
    if not text:
        raise ParseError(f"{path}: empty file")
    header = MatrixMarketHeader.parse(text[0])
    body = _data_lines(enumerate(text[1:], start=2))
    try:
        lineno, size = next(body)
    except StopIteration:
        raise ParseError(f"{path}: missing size line") from None

    symmetric = header.symmetry == "symmetric"
    if header.format == "coordinate":
        nrows, ncols, nnz = _ints(size, 3, lineno)
    else:
        nrows, ncols = _ints(size, 2, lineno)
        nnz = ncols * (ncols + 1) // 2 if symmetric else nrows * ncols
    if nrows <= 0 or ncols <= 0 or nnz < 0:
        raise ParseError(f"{path}: matrix dimensions must be positive")
    if symmetric and nrows != ncols:
        raise ParseError(f"{path}: symmetric matrix must be square")

    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz)
    if header.format == "coordinate":
        k = 0
        for lineno, tok in body:
            if k == nnz:
                raise ParseError(f"line {lineno}: more entries than the declared {nnz}")
            if len(tok) != 3:
                raise ParseError(f"line {lineno}: expected 'row col value'")
            i, j = _ints(tok[:2], 2, lineno)
            if not (1 <= i <= nrows and 1 <= j <= ncols):
                raise ParseError(f"line {lineno}: index ({i}, {j}) out of bounds")
            rows[k], cols[k], vals[k] = i - 1, j - 1, _real(tok[2], lineno)
            k += 1
        if k != nnz:
            raise ParseError(f"{path}: found {k} entries, declared {nnz}")
    else:
        if symmetric:
            coords = [(i, j) for j in range(ncols) for i in range(j, nrows)]
        else:
            coords = [(i, j) for j in range(ncols) for i in range(nrows)]
        k = 0
        for lineno, tok in body:
            for t in tok:
                if k == nnz:
                    raise ParseError(f"line {lineno}: more values than the declared shape")
                rows[k], cols[k] = coords[k]
                vals[k] = _real(t, lineno)
                k += 1
        if k != nnz:
            raise ParseError(f"{path}: found {k} values, expected {nnz}")
        keep = vals != 0.0
        rows, cols, vals = rows[keep], cols[keep], vals[keep]

    if symmetric:
        off = rows != cols
        rows, cols, vals = (
            np.concatenate([rows, cols[off]]),
            np.concatenate([cols, rows[off]]),
            np.concatenate([vals, vals[off]]),
        )
    return from_arrays(nrows, ncols, rows, cols, vals)


def write_matrix_market(path, A: SparseMatrix) -> None:
    """Write A as a general coordinate real file, entries in column-major order."""
    if A.nrows == 0 or A.ncols == 0:
        raise ValueError("refusing to write a matrix with an empty dimension")
    cols = np.repeat(np.arange(A.ncols), np.diff(A.colptr))
    with open(path, "w") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        fh.write(f"{A.nrows} {A.ncols} {A.nnz}\n")
        for i, j, v in zip(A.rowind, cols, A.values):
            fh.write(f"{i + 1} {j + 1} {v:.17g}\n")


def read_vector(path) -> np.ndarray:
    """One real per line; '%' comment lines and blank lines are skipped."""
    out = []
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("%"):
                continue
            tok = s.split()
            if len(tok) != 1:
                raise ParseError(f"{path}:{lineno}: expected one value per line")
            out.append(_real(tok[0], lineno))
    if not out:
        raise ParseError(f"{path}: no values (empty vectors are rejected)")
    return np.array(out)


def write_vector(path, v) -> None:
    v = as_vector(v)
    if len(v) == 0:
        raise ValueError("refusing to write an empty vector")
    with open(path, "w") as fh:
        fh.write(format_vector(v))


def format_vector(v) -> str:
    return "".join(f"{x:.17g}\n" for x in v)
