"""Exception hierarchy shared by all solver layers."""


class MvFetiError(Exception):
    """Base class for all errors raised by this package."""


# --- dense linear algebra ---------------------------------------------------

class NotSymmetric(MvFetiError):
    pass


class IndefiniteMatrix(MvFetiError):
    pass


class DimensionMismatch(MvFetiError):
    pass


class NegativeEigenvalueBeyondTolerance(MvFetiError):
    pass


# --- problem generation -----------------------------------------------------

class InvalidGeometry(MvFetiError):
    pass


class InterfaceMismatch(MvFetiError):
    pass


class NotElastic(MvFetiError):
    pass


class NodeNotFound(MvFetiError):
    pass


# --- decomposition / multivector ---------------------------------------------

class TopologyMismatch(MvFetiError):
    pass


class MixedPatterns(MvFetiError):
    pass


# --- iterative solvers --------------------------------------------------------

class SolverError(MvFetiError):
    pass


class SingularCoarseGram(SolverError):
    pass


class BreakdownZeroDenominator(SolverError):
    pass


class TotalRankCollapse(SolverError):
    pass


class MaxIterationsExceeded(SolverError):
    """Raised when the iteration budget is exhausted.

    The partial solve (including its convergence record) is attached as
    ``.result`` so callers can still inspect the history.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


# --- harness -------------------------------------------------------------------

class ConfigError(MvFetiError):
    pass


class SingularGlobalMatrix(MvFetiError):
    pass
