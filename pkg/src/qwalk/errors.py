"""Exception types shared across the package."""


class QwalkError(Exception):
    """Base class for all package errors."""


class InvalidParameter(QwalkError, ValueError):
    pass


class NumericsError(QwalkError):
    """Raised when a linear-algebra contract (shape, symmetry, residual) is violated."""


class Nonsquare(NumericsError, ValueError):
    pass


class NotHermitian(NumericsError, ValueError):
    pass


class NotUnitary(NumericsError, ValueError):
    pass


class DimensionMismatch(NumericsError, ValueError):
    pass


class EigensolverFailure(NumericsError):
    """The decomposition ran but its residual exceeds the contract bound."""


class TooLarge(QwalkError, ValueError):
    pass


class DegenerateHoppingWarning(UserWarning):
    """A hopping with vanishing real part (or magnitude) was mapped to a reversing edge."""
