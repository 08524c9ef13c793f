"""Exception types shared across the package."""


class LilrandError(Exception):
    """Base class for package errors."""


class ParseError(LilrandError, ValueError):
    def __init__(self, message, record=None):
        self.record = record
        if record is not None:
            message = f"record {record}: {message}"
        super().__init__(message)


class BitOverflowError(LilrandError, OverflowError):
    """A decoded value needs more bits than the declared record length."""

    def __init__(self, message, record=None, bit_length=None):
        self.record = record
        self.bit_length = bit_length
        if record is not None:
            message = f"record {record}: {message}"
        super().__init__(message)


class DomainError(LilrandError, ValueError):
    pass


class CapacityError(LilrandError, RuntimeError):
    """Raised when a computation would exceed its configured size guard."""


class NoQuantileError(LilrandError, ArithmeticError):
    pass


class EmptyExtractionError(LilrandError, ValueError):
    pass
