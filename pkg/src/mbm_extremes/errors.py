"""Exception hierarchy. CLI exit codes are keyed off these classes."""


class MbmError(Exception):
    """Base class for all package errors."""


class ConfigError(MbmError, ValueError):
    """Malformed or inconsistent configuration (exit code 2)."""


class DomainError(MbmError, ValueError):
    """Argument outside the mathematical domain of an operation (exit code 3)."""


class PreconditionError(DomainError):
    """A hypothesis of the tail formulas or an estimator precondition does not hold (exit code 3)."""


class MissingConstantError(PreconditionError, KeyError):
    """A Pickands/Piterbarg constant was requested that the provider cannot supply."""

    def __str__(self):
        return str(self.args[0]) if self.args else "missing constant"


class NumericalError(MbmError, ArithmeticError):
    """Numerical failure: factorization breakdown, non-finite samples (exit code 4)."""


class FactorizationError(NumericalError):
    def __init__(self, message, worst_pivot=None, jitter=None):
        super().__init__(message)
        self.worst_pivot = worst_pivot
        self.jitter = jitter


class AsymptoticWarning(UserWarning):
    """The asymptotic regime is barely entered (mu small) or an estimate looks unreliable."""
