"""Exception types shared across the package."""


class KepregError(Exception):
    """Base class for every error raised by kepreg."""


class DomainError(KepregError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RegimeError(KepregError, ValueError):
    """A solver was invoked outside its strict-convexity regime (eta * alpha >= 1)."""


class DataError(KepregError, ValueError):
    """Input data violates a structural precondition (degenerate design, bad schema)."""


class CsvFormatError(KepregError, ValueError):
    """A CSV file could not be parsed; message carries row/column diagnostics."""


class NumericalError(KepregError, ArithmeticError):
    """A numerical routine failed to produce a usable result."""
