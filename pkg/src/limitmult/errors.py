"""Exception hierarchy shared by all modules."""


class HarnessError(Exception):
    """Base class for every error raised by this package."""


class DomainError(HarnessError, ValueError):
    """An argument lies outside the domain of an operation."""


class UnsupportedDegreeError(DomainError):
    """Only quadratic base fields are computed directly."""


class UnsupportedRegimeError(DomainError):
    """An L-value was requested where no certified method exists."""


class InternalConsistencyError(HarnessError):
    """Two independent computations of the same quantity disagree."""


class GuardError(HarnessError):
    """A size guard refused an enumeration that would be too large."""


class NotRegularError(HarnessError):
    """The truncation parameter is not regular enough for the field."""


class NotInFieldError(HarnessError):
    """A polynomial has coefficients outside the ring of integers of the field."""


class NotEllipticError(HarnessError):
    """The characteristic polynomial splits over Q_p, so the fixed set is infinite."""


class ConfigError(HarnessError):
    """A scan configuration failed validation."""


class IngestError(HarnessError):
    """A field table could not be parsed."""
