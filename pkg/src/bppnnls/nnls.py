"""Block principal pivoting for min 1/2 ||Ax - b||^2 subject to x >= 0.

The free set F holds the variables solved for by unconstrained least squares;
the bound set G holds variables fixed at zero, whose duals y_G are read off
the residual.  Infeasible variables (negative x_F or y_G) are swapped in
blocks; when the infeasible count stops falling for ``p_max`` consecutive
tries the solver drops to Murty's single-variable rule.  Entries within
``zero_tolerance`` of zero are snapped to zero after every update, which keeps
variables whose optimal value is exactly zero from bouncing between the sets
on rounding noise.

Intermediate subproblems go through the normal equations on principal
submatrices of one cached Gram matrix; the final support is re-solved with
LSQR when accuracy calls for it.
"""

from __future__ import annotations

import enum
import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import cholesky
from .cholesky import CholeskyFactor, ConditionEstimate
from .errors import (
    DimensionMismatch,
    IterationLimit,
    NoFeasibleBasis,
    NoInfeasible,
    NotPositiveDefinite,
    TooLarge,
)
from .lsqr import LsqrOptions, lsqr_solve
from .sparsemat import (
    SparseMatrix,
    as_selection,
    as_vector,
    gram,
    gram_submatrix,
    matvec,
    norm1,
    rmatvec,
    select_columns,
)

log = logging.getLogger(__name__)

ORACLE_MAX_N = 20
MAX_REFINEMENTS = 3


class Mode(enum.Enum):
    NormalEquationsOnly = "normal"
    LsqrFinal = "lsqr"
    Adaptive = "adaptive"


class ExchangeRule(enum.Enum):
    All = "all"
    SingleLargestIndex = "single"


@dataclass(frozen=True)
class Problem:
    A: SparseMatrix
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "b", as_vector(self.b, self.A.nrows, "b"))
        if self.A.ncols < 1:
            raise DimensionMismatch("A needs at least one column")
        if self.A.nrows < self.A.ncols:
            raise DimensionMismatch(
                f"A is {self.A.nrows}x{self.A.ncols}; need at least as many rows as columns"
            )

    @property
    def m(self) -> int:
        return self.A.nrows

    @property
    def n(self) -> int:
        return self.A.ncols


@dataclass(frozen=True)
class Partition:
    F: np.ndarray
    G: np.ndarray

    @classmethod
    def from_free_mask(cls, free: np.ndarray) -> "Partition":
        return cls(np.flatnonzero(free), np.flatnonzero(~free))

    def free_mask(self, n: int) -> np.ndarray:
        mask = np.zeros(n, dtype=bool)
        mask[self.F] = True
        return mask

    def check(self, n: int) -> None:
        both = np.concatenate([self.F, self.G])
        if len(both) != n or not np.array_equal(np.sort(both), np.arange(n)):
            raise AssertionError("F and G do not partition the index set")


@dataclass
class IterationState:
    partition: Partition
    xF: np.ndarray
    yG: np.ndarray
    p: int
    N: float = math.inf
    iteration: int = 0


@dataclass(frozen=True)
class SolverOptions:
    # 0 disables the clamp (used to demonstrate why it exists)
    zero_tolerance: float = 1e-12
    p_max: int = 3
    max_iterations: int | None = None  # None means 10 * n
    mode: Mode = Mode.LsqrFinal
    adaptive_error_threshold: float = 1e-8
    lsqr: LsqrOptions = field(default_factory=LsqrOptions)
    # fall back to LSQR on a subproblem whose normal equations break down
    lsqr_fallback: bool = True

    def __post_init__(self):
        if self.zero_tolerance < 0:
            raise ValueError("zero_tolerance must be nonnegative")
        if not 0 < self.adaptive_error_threshold < 1:
            raise ValueError("adaptive_error_threshold must lie in (0, 1)")
        if self.p_max < 0:
            raise ValueError("p_max must be nonnegative")


@dataclass(frozen=True)
class KktReport:
    min_x: float
    min_y: float
    max_complementarity: float
    primal_residual_norm: float
    residual_norm: float = 0.0


@dataclass
class SolverResult:
    x: np.ndarray
    y: np.ndarray
    objective: float
    kkt: KktReport
    condition: ConditionEstimate | None
    pivot_iterations: int
    single_exchange_count: int
    refined_with_lsqr: bool
    F: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    @property
    def support(self) -> np.ndarray:
        return self.F


# ---------------------------------------------------------------------------
# building blocks


def unconstrained_ls_normal_eq(
    A: SparseMatrix, gramA: SparseMatrix, sel, b
) -> tuple[np.ndarray, CholeskyFactor]:
    """Solve min ||A_F x_F - b|| through the normal equations.

    The matrix A_F^T A_F is taken from the cached Gram matrix, never
    recomputed.  NotPositiveDefinite propagates to the caller.
    """
    xF, factor, _ = _normal_eq(A, gramA, sel, b)
    return xF, factor


def _normal_eq(A, gramA, sel, b):
    sel = as_selection(sel, A.ncols)
    if len(sel) == 0:
        raise ValueError("selection must be nonempty")
    M = gram_submatrix(gramA, sel)
    factor = cholesky.factorize(M)
    rhs = rmatvec(select_columns(A, sel), b)
    return cholesky.solve(factor, rhs), factor, M


def dual_vector(A: SparseMatrix, sel_G, residual) -> np.ndarray:
    """y_G = A_G^T (A_F x_F - b), given the residual A_F x_F - b."""
    residual = as_vector(residual, A.nrows, "residual")
    sel_G = as_selection(sel_G, A.ncols)
    if len(sel_G) == 0:
        return np.zeros(0)
    return rmatvec(select_columns(A, sel_G), residual)


def zero_clamp(v, tol: float) -> np.ndarray:
    """Copy of v with every |v_i| < tol set to exactly zero."""
    v = np.array(v, dtype=np.float64)
    v[np.abs(v) < tol] = 0.0
    return v


def exchange_infeasible(state: IterationState, rule: ExchangeRule) -> Partition:
    """Move infeasible variables across the partition.

    ``All`` swaps every negative x_F entry into G and every negative y_G entry
    into F; ``SingleLargestIndex`` moves only the infeasible variable with the
    largest column index.
    """
    F, G = state.partition.F, state.partition.G
    bad_F = F[state.xF < 0]
    bad_G = G[state.yG < 0]
    if len(bad_F) == 0 and len(bad_G) == 0:
        raise NoInfeasible("no infeasible variables to exchange")
    if rule is ExchangeRule.SingleLargestIndex:
        j = max(bad_F.max(initial=-1), bad_G.max(initial=-1))
        bad_F = bad_F[bad_F == j]
        bad_G = bad_G[bad_G == j]
    newF = np.union1d(np.setdiff1d(F, bad_F), bad_G).astype(np.int64)
    newG = np.union1d(np.setdiff1d(G, bad_G), bad_F).astype(np.int64)
    return Partition(newF, newG)


def kkt_residuals(problem: Problem, x, y) -> KktReport:
    """Recompute y' = A^T (Ax - b) and measure how far (x, y') is from a KKT point."""
    A, b = problem.A, problem.b
    x = as_vector(x, A.ncols, "x")
    y = as_vector(y, A.ncols, "y")
    r = matvec(A, x) - b
    yr = rmatvec(A, r)
    return KktReport(
        min_x=float(x.min()),
        min_y=float(yr.min()),
        max_complementarity=float(np.abs(x * yr).max()),
        primal_residual_norm=float(np.abs(y - yr).max()),
        residual_norm=float(np.linalg.norm(r)),
    )


# ---------------------------------------------------------------------------
# the solver


class _Subsolver:
    """Solves the F-subproblems of one bpp_solve call against a single Gram matrix."""

    def __init__(self, problem: Problem, opts: SolverOptions):
        self.A = problem.A
        self.b = problem.b
        self.opts = opts
        self.gramA = gram(self.A)
        self.condition: ConditionEstimate | None = None

    def update(self, partition: Partition) -> tuple[np.ndarray, np.ndarray]:
        F, G = partition.F, partition.G
        if len(F) == 0:
            xF = np.zeros(0)
            residual = -self.b
        else:
            try:
                xF, factor, M = _normal_eq(self.A, self.gramA, F, self.b)
                self.condition = cholesky.condest_1norm(factor, norm1(M))
            except NotPositiveDefinite:
                if not self.opts.lsqr_fallback:
                    raise
                log.debug("normal equations failed on |F|=%d, using LSQR", len(F))
                self.condition = None
                xF = self.lsqr(F)
            residual = matvec(select_columns(self.A, F), xF) - self.b
        yG = dual_vector(self.A, G, residual)
        tol = self.opts.zero_tolerance
        return zero_clamp(xF, tol), zero_clamp(yG, tol)

    def lsqr(self, F: np.ndarray) -> np.ndarray:
        out = lsqr_solve(select_columns(self.A, F), self.b, self.opts.lsqr)
        return out.x

    def refine(self, partition: Partition) -> tuple[np.ndarray, np.ndarray]:
        xF = self.lsqr(partition.F)
        residual = matvec(select_columns(self.A, partition.F), xF) - self.b
        yG = dual_vector(self.A, partition.G, residual)
        tol = self.opts.zero_tolerance
        return zero_clamp(xF, tol), zero_clamp(yG, tol)


def _infeasible_count(state: IterationState) -> int:
    return int(np.count_nonzero(state.xF < 0) + np.count_nonzero(state.yG < 0))


def bpp_solve(problem: Problem, opts: SolverOptions | None = None) -> SolverResult:
    """Nonnegative least squares by block principal pivoting.

    Starts from F = {}, x = 0, y = -A^T b.  Each pass counts the infeasible
    variables; a new best count resets the backoff budget and swaps them all,
    otherwise the budget is spent one block swap at a time before falling back
    to the single largest-index swap.  After the loop, the final support is
    re-solved with LSQR in ``LsqrFinal`` mode, or in ``Adaptive`` mode when
    the estimated normal-equations error exceeds the threshold.  If the
    re-solve exposes a new infeasibility, pivoting resumes from there.

    Raises IterationLimit when no feasible partition is found within
    ``max_iterations`` exchanges.
    """
    opts = opts or SolverOptions()
    n = problem.n
    max_iter = opts.max_iterations if opts.max_iterations is not None else 10 * n
    sub = _Subsolver(problem, opts)

    partition = Partition(np.zeros(0, dtype=np.int64), np.arange(n, dtype=np.int64))
    xF, yG = sub.update(partition)
    state = IterationState(partition, xF, yG, p=opts.p_max)
    singles = 0
    refinements = 0
    refined = False

    while True:
        while (count := _infeasible_count(state)) > 0:
            if state.iteration >= max_iter:
                raise IterationLimit(state.iteration)
            if count < state.N:
                state.N = count
                state.p = opts.p_max
                rule = ExchangeRule.All
            elif state.p > 0:
                state.p -= 1
                rule = ExchangeRule.All
            else:
                rule = ExchangeRule.SingleLargestIndex
                singles += 1
            state.partition = exchange_infeasible(state, rule)
            if __debug__:
                state.partition.check(n)
            state.xF, state.yG = sub.update(state.partition)
            state.iteration += 1

        if len(state.partition.F) == 0 or refinements >= MAX_REFINEMENTS:
            break
        want = opts.mode is Mode.LsqrFinal or (
            opts.mode is Mode.Adaptive
            and (
                sub.condition is None
                or sub.condition.predicted_relative_error > opts.adaptive_error_threshold
            )
        )
        if not want:
            break
        state.xF, state.yG = sub.refine(state.partition)
        refinements += 1
        refined = True
        if _infeasible_count(state) == 0:
            break
        log.debug("LSQR re-solve broke feasibility; resuming pivoting")
        refined = False

    x = np.zeros(n)
    y = np.zeros(n)
    x[state.partition.F] = state.xF
    y[state.partition.G] = state.yG
    r = matvec(problem.A, x) - problem.b
    return SolverResult(
        x=x,
        y=y,
        objective=0.5 * float(r @ r),
        kkt=kkt_residuals(problem, x, y),
        condition=sub.condition,
        pivot_iterations=state.iteration,
        single_exchange_count=singles,
        refined_with_lsqr=refined,
        F=state.partition.F,
    )


# ---------------------------------------------------------------------------
# brute-force reference


def oracle_nnls(problem: Problem, tol: float = 1e-9) -> SolverResult:
    """Exact NNLS by enumerating all 2^n supports with dense normal equations.

    A support is accepted when x_F >= -tol * scale and y_G >= -tol * scale;
    among accepted supports the one with the smallest objective wins.
    """
    n = problem.n
    if n > ORACLE_MAX_N:
        raise TooLarge(f"n = {n} exceeds the enumeration limit {ORACLE_MAX_N}")
    A = problem.A.to_dense()
    b = problem.b
    AtA = A.T @ A
    Atb = A.T @ b
    scale = max(1.0, float(np.abs(A).sum(axis=0).max()) * float(np.abs(b).max()))
    best = None
    for k in range(n + 1):
        for F in itertools.combinations(range(n), k):
            F = list(F)
            x = np.zeros(n)
            if F:
                try:
                    x[F] = np.linalg.solve(AtA[np.ix_(F, F)], Atb[F])
                except np.linalg.LinAlgError:
                    continue
            y = AtA @ x - Atb
            G = [j for j in range(n) if j not in F]
            if np.any(x[F] < -tol * scale) or np.any(y[G] < -tol * scale):
                continue
            x = np.maximum(x, 0.0)
            r = A @ x - b
            obj = 0.5 * float(r @ r)
            if best is None or obj < best[0]:
                y[F] = 0.0
                best = (obj, x, y, np.array(F, dtype=np.int64))
    if best is None:
        raise NoFeasibleBasis("no support satisfied the KKT conditions")
    obj, x, y, F = best
    return SolverResult(
        x=x,
        y=y,
        objective=obj,
        kkt=kkt_residuals(problem, x, y),
        condition=None,
        pivot_iterations=0,
        single_exchange_count=0,
        refined_with_lsqr=False,
        F=F,
    )
