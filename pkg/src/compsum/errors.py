"""Exception types shared across the package."""


class CompsumError(Exception):
    """Base class for every error raised by compsum."""


class DomainError(CompsumError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class AccuracyError(CompsumError, ArithmeticError):
    """A numerical tolerance could not be met.

    ``estimate`` holds the best value computed before giving up.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class RegimeError(CompsumError, ValueError):
    """Formula used outside its regime (proper vs defective, c vs c*)."""


class DegeneracyError(CompsumError, ValueError):
    """A variance or correlation determinant that must be positive is not."""


class UnsupportedError(CompsumError, NotImplementedError):
    """Operation not available for the given model form."""


class ModelError(CompsumError, ValueError):
    """Ill-formed stochastic model (e.g. reducible chain)."""


class ConfigError(CompsumError, ValueError):
    """Malformed configuration file."""
