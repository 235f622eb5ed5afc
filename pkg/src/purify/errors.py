"""Exception types raised across the package."""


class PurifyError(Exception):
    """Base class for all errors raised by :mod:`purify`."""


class DimensionMismatch(PurifyError, ValueError):
    pass


class ZeroVector(PurifyError, ArithmeticError):
    """A vector's norm underflowed; usually an exact annihilation by a shift."""


class NotSymmetric(PurifyError, ValueError):
    pass


class NoConvergence(PurifyError, RuntimeError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class AllDegenerate(PurifyError, ValueError):
    pass


class BadTarget(PurifyError, IndexError):
    pass


class NotConverged(PurifyError, RuntimeError):
    """Raised by :meth:`RunResult.raise_for_status`; carries the whole result."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class DegenerateOffset(PurifyError, ValueError):
    pass


class DegenerateGap(PurifyError, ValueError):
    pass


class NonOrthonormalBasis(PurifyError, ValueError):
    pass


class EmptySector(PurifyError, ValueError):
    pass


class RankDeficient(PurifyError, RuntimeError):
    pass


class FormatError(PurifyError, ValueError):
    pass
