"""Exception types raised across the package."""


class NNLSError(Exception):
    """Base class for all solver errors."""


class DimensionMismatch(NNLSError, ValueError):
    pass


class IndexOutOfRange(NNLSError, IndexError):
    pass


class NotPositiveDefinite(NNLSError, ArithmeticError):
    """A Cholesky pivot was nonpositive, tiny, or not finite."""

    def __init__(self, column, pivot):
        super().__init__(f"nonpositive pivot {pivot!r} at column {column}")
        self.column = column
        self.pivot = pivot


class ZeroMatrix(NNLSError, ValueError):
    pass


class IterationLimit(NNLSError, RuntimeError):
    """Pivoting did not terminate within the allowed number of iterations."""

    def __init__(self, iterations):
        super().__init__(f"no feasible partition after {iterations} iterations")
        self.iterations = iterations


class NoInfeasible(NNLSError, ValueError):
    pass


class TooLarge(NNLSError, ValueError):
    pass


class NoFeasibleBasis(NNLSError, ArithmeticError):
    pass


class SpecInvalid(NNLSError, ValueError):
    pass


class ParseError(NNLSError, ValueError):
    pass


class UnsupportedFormat(ParseError):
    pass
