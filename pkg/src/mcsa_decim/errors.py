"""Exception hierarchy shared by every module in the toolkit."""


class McsaError(Exception):
    """Base class for all toolkit errors."""


class InvalidParameterError(McsaError, ValueError):
    """An argument violates a documented precondition."""


class InvalidLengthError(InvalidParameterError):
    """A transform received a length that is not a power of two."""


class EmptyOutputError(McsaError, ValueError):
    """An operation would produce fewer samples than it can work with."""


class UndefinedReferenceError(McsaError, ArithmeticError):
    """A relative comparison has no usable reference value."""


class SignalFormatError(McsaError):
    """A signal file is corrupt or its header disagrees with its payload."""
