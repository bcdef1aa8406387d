"""Exception hierarchy shared by every module."""


class SitecalcError(Exception):
    """Base class for all errors raised by sitecalc."""


class MalformedTable(SitecalcError):
    """A table entry references an out-of-range object or morphism id."""


class CapExceeded(SitecalcError):
    """An input is larger than a configured size cap."""


class BudgetExceeded(SitecalcError):
    """An enumeration would exceed the configured search budget."""


class ValidationError(SitecalcError):
    """A structure failed validation; ``report`` carries every violation."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class AxiomViolation(ValidationError):
    pass


class CarrierMismatch(ValidationError):
    pass


class TypeMismatch(SitecalcError):
    pass


class NoKernelPair(SitecalcError):
    pass


class MissingPullback(SitecalcError):
    pass


class NotPreregular(SitecalcError):
    pass


class NotExtensive(SitecalcError):
    pass


class NotPrecoherent(SitecalcError):
    pass


class PreconditionFailed(SitecalcError):
    pass


class ParseError(SitecalcError):
    def __init__(self, message, line=0, column=0):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
