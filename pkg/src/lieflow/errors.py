"""Exception types raised across the package."""


class LieFlowError(Exception):
    """Base class for all package errors."""


class NotSquareError(LieFlowError, ValueError):
    pass


class EigenvalueAtMinusOne(LieFlowError, ArithmeticError):
    """The principal logarithm is undefined: -1 lies in the spectrum (cut locus)."""


class NoConvergence(LieFlowError, ArithmeticError):
    pass


class MixedAlgebras(LieFlowError, ValueError):
    pass


class MixedGroups(LieFlowError, ValueError):
    pass


class WrongAlgebra(LieFlowError, ValueError):
    pass


class NotInGroup(LieFlowError, ValueError):
    pass


class UnknownGroup(LieFlowError, KeyError):
    pass


class ZeroVector(LieFlowError, ValueError):
    pass


class AllZero(LieFlowError, ValueError):
    pass


class InvalidTolerance(LieFlowError, ValueError):
    pass


class HNotInTube(LieFlowError, ValueError):
    pass
