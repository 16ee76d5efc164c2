"""Exception hierarchy.

Input problems derive from :class:`InputError` (CLI exit code 2); numerical
and internal-consistency problems derive from :class:`NumericalError`
(exit code 3).
"""


class SILError(Exception):
    """Base class for all package errors."""


class InputError(SILError, ValueError):
    """Malformed or out-of-domain input."""


class DimensionError(InputError):
    pass


class DomainError(InputError):
    pass


class UnsupportedInputError(InputError):
    """Input outside the convex setting handled here."""


class NumericalError(SILError, ArithmeticError):
    """A numerical procedure could not reach the requested accuracy."""


class IntegrationAccuracyError(NumericalError):
    pass


class ResolutionError(NumericalError):
    """Grid or step resolution too coarse to resolve a discrete quantity."""


class SingularityError(NumericalError):
    pass


class InternalConsistencyError(NumericalError):
    """Two independent computations of the same integer disagree."""


class NotASolutionError(NumericalError):
    pass


class ClassificationError(NumericalError):
    def __init__(self, message, half_period_distance=None, shift_distance=None):
        super().__init__(message)
        self.half_period_distance = half_period_distance
        self.shift_distance = shift_distance
