"""LSQR for min ||Ax - b||_2 (Golub-Kahan bidiagonalization, no damping)."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, ZeroMatrix
from .sparsemat import SparseMatrix, as_vector, matvec, norm_fro, rmatvec


class StopReason(enum.Enum):
    RhsSolved = 1
    LeastSquaresConverged = 2
    ConditionLimit = 3
    IterationLimit = 4


@dataclass(frozen=True)
class LsqrOptions:
    atol: float = 1e-15
    btol: float = 1e-15
    conlim: float = 1e8
    itn_limit: int | None = None  # None means 10 * ncols

    def __post_init__(self):
        if self.atol < 0 or self.btol < 0:
            raise ValueError("atol and btol must be nonnegative")
        if not self.conlim > 0:
            raise ValueError("conlim must be positive")
        if self.itn_limit is not None and self.itn_limit < 1:
            raise ValueError("itn_limit must be at least 1")


@dataclass
class LsqrOutcome:
    x: np.ndarray
    iterations: int
    stop_reason: StopReason
    residual_norm: float
    normal_eq_residual_norm: float
    anorm: float = 0.0
    acond: float = 0.0
    residual_history: list[float] = field(default_factory=list)


def lsqr_solve(A: SparseMatrix, b, opts: LsqrOptions | None = None) -> LsqrOutcome:
    """Least-squares solution of A x = b by LSQR.

    Stops when ||r|| <= btol ||b|| + atol ||A|| ||x||, when
    ||A^T r|| / (||A|| ||r||) <= atol, when the running estimate of cond(A)
    reaches conlim, or after ``itn_limit`` iterations.  ||A|| is the
    Frobenius-type estimate accumulated from the bidiagonalization.
    ``residual_history`` holds ||r_k|| for k = 0, 1, ... as estimated by the
    recurrence (nonincreasing by construction).
    """
    opts = opts or LsqrOptions()
    m, n = A.shape
    b = as_vector(b, m, "b")
    if n == 0:
        raise DimensionMismatch("A has no columns")
    if norm_fro(A) == 0.0:
        raise ZeroMatrix("A is numerically zero")
    itn_limit = opts.itn_limit if opts.itn_limit is not None else 10 * n
    ctol = 1.0 / opts.conlim

    x = np.zeros(n)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return LsqrOutcome(x, 0, StopReason.RhsSolved, 0.0, 0.0, residual_history=[0.0])
    u = b / bnorm
    v = rmatvec(A, u)
    alpha = float(np.linalg.norm(v))
    if alpha == 0.0:
        # b is orthogonal to range(A): x = 0 is already optimal
        return LsqrOutcome(
            x, 0, StopReason.LeastSquaresConverged, bnorm, 0.0, residual_history=[bnorm]
        )
    v /= alpha
    w = v.copy()

    beta = bnorm
    rhobar, phibar = alpha, beta
    anorm = acond = ddnorm = 0.0
    rnorm, arnorm = beta, alpha * beta
    history = [rnorm]
    itn = 0
    stop = None

    while stop is None:
        itn += 1
        u = matvec(A, v) - alpha * u
        beta = float(np.linalg.norm(u))
        if beta > 0.0:
            u /= beta
        anorm = math.sqrt(anorm * anorm + alpha * alpha + beta * beta)
        v = rmatvec(A, u) - beta * v
        alpha = float(np.linalg.norm(v))
        if alpha > 0.0:
            v /= alpha

        rho = math.hypot(rhobar, beta)
        c = rhobar / rho
        s = beta / rho
        theta = s * alpha
        rhobar = -c * alpha
        phi = c * phibar
        phibar = s * phibar
        tau = s * phi

        dk = w / rho
        x += (phi / rho) * w
        w = v - (theta / rho) * w
        ddnorm += float(dk @ dk)
        acond = anorm * math.sqrt(ddnorm)

        rnorm = phibar
        arnorm = alpha * abs(tau)
        history.append(rnorm)
        xnorm = float(np.linalg.norm(x))

        test1 = rnorm / bnorm
        test2 = arnorm / (anorm * rnorm) if rnorm > 0.0 else 0.0
        test3 = 1.0 / acond
        t1 = test1 / (1.0 + anorm * xnorm / bnorm)
        rtol = opts.btol + opts.atol * anorm * xnorm / bnorm

        if test1 <= rtol or 1.0 + t1 <= 1.0:
            stop = StopReason.RhsSolved
        elif test2 <= opts.atol or 1.0 + test2 <= 1.0:
            stop = StopReason.LeastSquaresConverged
        elif test3 <= ctol or 1.0 + test3 <= 1.0:
            stop = StopReason.ConditionLimit
        elif itn >= itn_limit:
            stop = StopReason.IterationLimit

    return LsqrOutcome(x, itn, stop, rnorm, arnorm, anorm, acond, history)
