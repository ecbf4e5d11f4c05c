"""Sparse nonnegative least squares by block principal pivoting."""

from .cholesky import CholeskyFactor, ConditionEstimate, condest_1norm, factorize, solve
from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    IterationLimit,
    NNLSError,
    NotPositiveDefinite,
    ParseError,
    SpecInvalid,
    UnsupportedFormat,
)
from .gen import GeneratedProblem, GeneratorSpec, gen_p, gen_random_sparse
from .lsqr import LsqrOptions, LsqrOutcome, StopReason, lsqr_solve
from .nnls import (
    KktReport,
    Mode,
    Partition,
    Problem,
    SolverOptions,
    SolverResult,
    bpp_solve,
    kkt_residuals,
    oracle_nnls,
)
from .sparsemat import SparseMatrix, from_dense, from_triplets

__version__ = "0.1.0"
