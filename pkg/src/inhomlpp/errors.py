"""Exception hierarchy. The CLI maps each class to an exit code."""


class LPPError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class SpecError(LPPError, ValueError):
    """Malformed field specification string or experiment config."""

    exit_code = 2


class DomainError(LPPError, ValueError):
    """Argument outside the mathematical domain of an operation."""

    exit_code = 3


class UnsupportedFieldError(DomainError):
    """Operation not defined for this speed-field family."""


class MemoryBudgetError(DomainError):
    """Path storage would exceed the configured cell budget."""


class OutputError(LPPError, OSError):
    """Failure writing an output file."""

    exit_code = 4
