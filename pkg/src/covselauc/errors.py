"""Exception hierarchy.

Input problems derive from :class:`ValidationError` (also a ``ValueError``);
numerical failures derive from :class:`NumericalError` (an
``ArithmeticError``).  The CLI maps the two families to exit codes 2 and 3.
"""


class CovselError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(CovselError, ValueError):
    pass


class NumericalError(CovselError, ArithmeticError):
    pass


class NotSquare(ValidationError):
    pass


class NotSymmetric(ValidationError):
    pass


class NotPositiveDefinite(ValidationError):
    pass


class BadDiagonal(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class InvalidStructure(ValidationError):
    pass


class SingularSubmatrix(ValidationError):
    pass


class DegenerateCorrelation(ValidationError):
    pass


class OutOfDomain(ValidationError):
    pass


class ParseError(ValidationError):
    pass


class InvalidBeta(ValidationError):
    pass


class TooLarge(ValidationError):
    pass


class EmptyBin(ValidationError):
    pass


class EigenFailure(NumericalError):
    pass


class NonPositiveEigenvalue(NumericalError):
    pass


class QuadratureNonConvergence(NumericalError):
    pass


class RootNotBracketed(NumericalError):
    pass
