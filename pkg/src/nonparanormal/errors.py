"""Exception hierarchy.

Two families matter to callers: :class:`InputError` (bad covariance, bad
function description, bad configuration) and :class:`NumericalError`
(a series or quadrature that did not reach its tolerance). The CLI maps them
to different exit codes.
"""


class NonparanormalError(Exception):
    """Base class for every error raised by this package."""


class InputError(NonparanormalError, ValueError):
    pass


class NumericalError(NonparanormalError, ArithmeticError):
    pass


# -- input validation -------------------------------------------------------


class NotSymmetric(InputError):
    pass


class NotPositiveDefinite(InputError):
    def __init__(self, message, smallest_eigenvalue=None):
        super().__init__(message)
        self.smallest_eigenvalue = smallest_eigenvalue


class DegenerateD(InputError):
    pass


class UnsupportedRepresentation(InputError):
    pass


class ConstraintViolation(InputError):
    pass


class DomainError(InputError):
    pass


class RatioViolation(InputError):
    pass


class ConvergenceDomainViolation(InputError):
    pass


class DegreeTooLarge(InputError):
    pass


class IncompatibleMethod(InputError):
    pass


class ConfigError(InputError):
    pass


class GrowthViolation(InputError):
    """A Taylor coefficient exceeded its declared bound ``C * K**a``."""


# -- numerical failures -----------------------------------------------------


class MaxTermsExceeded(NumericalError):
    pass


class QuadratureNotConverged(NumericalError):
    pass


class ImaginaryResidue(NumericalError):
    pass


class MomentOverflow(NumericalError, OverflowError):
    pass


class NonFiniteSample(NumericalError):
    def __init__(self, message, coordinate=None, draw=None):
        super().__init__(message)
        self.coordinate = coordinate
        self.draw = draw


class SeriesDivergence(NumericalError):
    """Series terms failed to decay where the growth bound says they must."""
