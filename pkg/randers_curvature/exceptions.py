"""Exception hierarchy for randers-curvature."""

from __future__ import annotations


class RandersCurvatureException(Exception):
    """Base class for other exceptions"""

    pass


class ExpressionError(RandersCurvatureException):
    """Raised when a coefficient expression can't be parsed or evaluated"""

    pass


class ExpressionSyntaxError(ExpressionError):
    """Raised when an expression does not follow the grammar"""

    def __init__(
        self, message: str, position: int | None, expected: tuple[str, ...] = ()
    ):
        super().__init__(message)
        self.position = position
        self.expected = expected


class UnknownIdentifier(ExpressionError):
    """Raised when an expression names an unknown variable or function"""

    def __init__(self, message: str, name: str, position: int | None = None):
        super().__init__(message)
        self.name = name
        self.position = position


class ArityMismatch(ExpressionError):
    """Raised when a function is called with the wrong number of arguments"""

    pass


class ExpressionDomainError(ExpressionError):
    """Raised when evaluation leaves a function's domain (ln, sqrt, division)"""

    def __init__(self, message: str, subexpression: str):
        super().__init__(message)
        self.subexpression = subexpression


class JetError(RandersCurvatureException):
    """Raised for invalid jet operations"""

    pass


class JetSpaceMismatch(JetError):
    """Raised when jets over different variable sets or orders are combined"""

    pass


class UnsupportedJetOrder(JetError):
    """Raised when a truncation order is outside the supported budget"""

    pass


class MultiIndexOutOfRange(JetError):
    """Raised when a multi-index is not stored by a jet"""

    pass


class JetDomainError(JetError):
    """Raised when a jet function is applied outside its analytic domain"""

    pass


class MetricSpecInvalid(RandersCurvatureException):
    """Raised when a metric specification is malformed"""

    pass


class InadmissiblePoint(RandersCurvatureException):
    """Raised when a point is outside the Randers admissible set"""

    pass


class NotStronglyConvex(InadmissiblePoint):
    """Raised when the 1-form has alpha-norm b >= 1 at a point"""

    def __init__(self, message: str, b: float):
        super().__init__(message)
        self.b = b


class NotPositiveDefinite(InadmissiblePoint):
    """Raised when a_ij or g_ij fails to be positive definite"""

    pass


class NoAdmissibleSamples(RandersCurvatureException):
    """Raised when no admissible sample point could be drawn or evaluated"""

    pass


class GeneratorGaveUp(RandersCurvatureException):
    """Raised when random metric generation exhausts its attempts"""

    pass


class VerificationTimeout(RandersCurvatureException):
    """Raised when a verifier run exceeds its time budget"""

    pass


class InvalidArgument(RandersCurvatureException):
    """Raised when a command or operation argument is invalid"""

    pass


class DependencyVersionError(RandersCurvatureException):
    """Raised when an installed dependency is older than required"""

    pass
