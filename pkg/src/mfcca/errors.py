"""Exception hierarchy shared by the library and the command-line driver."""


class MfccaError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ConfigError(MfccaError, ValueError):
    exit_code = 2


class DataError(MfccaError, ValueError):
    exit_code = 3


class NumericalError(MfccaError, ArithmeticError):
    exit_code = 4
