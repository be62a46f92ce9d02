"""Exception hierarchy shared by every kronsensus module."""


class KronsensusError(Exception):
    """Base class for all library errors."""


class DomainError(KronsensusError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class SizeError(KronsensusError, ValueError):
    """A result would exceed the configured dimension caps."""


class NumericError(KronsensusError, ArithmeticError):
    """A numeric routine failed; ``partial`` carries whatever was computed."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class DivergenceError(NumericError):
    """An infinite series does not converge (essential spectral radius >= 1)."""


class ValidationError(DomainError):
    """A matrix does not satisfy the consensus conditions it was required to."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
