"""Exception types raised by the toolkit."""


class OptrigError(Exception):
    """Base class for every error raised by optrig."""


class SingularOperator(OptrigError):
    pass


class NearKernel(OptrigError):
    """The evaluation point lies (numerically) in N(A) or N(T)."""


class NontrivialKernel(OptrigError):
    pass


class InternalInconsistency(OptrigError):
    """Two mathematically equivalent numerical tests disagreed."""


class StepStall(OptrigError):
    """A contraction iteration did not reach tolerance."""


class PreconditionFailure(OptrigError):
    pass


class NonHilbert(OptrigError):
    """An operation needing the Euclidean structure was called with p != 2."""


class Inconclusive(OptrigError):
    """Iteration budget exhausted without convergence or blow-up.

    The partial result is kept on ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class MatrixFormatError(OptrigError):
    pass
