"""Exception hierarchy shared by every module."""


class SubconvexError(Exception):
    """Base class for all errors raised by this package."""


class PreconditionError(SubconvexError, ValueError):
    """An operation was called outside its documented domain."""


class NonInvertible(PreconditionError):
    pass


class NotPrimitive(PreconditionError):
    pass


class IncompatibleModuli(PreconditionError):
    pass


class EmptyRange(PreconditionError):
    pass


class DomainError(PreconditionError):
    pass


class ConfigError(PreconditionError):
    pass


class BreakpointOverflow(SubconvexError):
    pass


class InsufficientCoefficients(SubconvexError):
    pass


class QuadratureFailure(SubconvexError):
    pass


class DegeneratePoint(SubconvexError):
    pass


class CoefficientFileError(SubconvexError):
    """Base for problems reading a coefficient file."""


class ParseError(CoefficientFileError):
    pass


class NormalizationError(CoefficientFileError):
    pass


class MissingHeader(CoefficientFileError):
    pass


class CheckFailure(SubconvexError):
    """A verification suite ran but at least one check failed."""

    def __init__(self, message: str, records=None):
        super().__init__(message)
        self.records = records or []
