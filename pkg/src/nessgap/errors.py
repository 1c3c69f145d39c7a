class NessgapError(Exception):
    """Base class for package errors."""


class NumericalFailure(NessgapError):
    """A computation did not meet its accuracy or stability contract."""


class VerificationFailure(NessgapError):
    """A structural identity or bound failed to hold."""
