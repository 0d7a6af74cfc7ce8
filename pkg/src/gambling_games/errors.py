"""Exception types shared by every module.

Each class maps to one CLI exit code: input errors exit with 2, numerical
failures with 3.
"""


class InputError(ValueError):
    """Malformed or inconsistent input (dimension mismatch, bad metric...)."""


class NumericalError(ArithmeticError):
    """A solver could not reach its tolerance.

    ``residual`` carries the best achieved residual and ``details`` any extra
    diagnostic payload (for example both candidates of a disagreement).
    """

    def __init__(self, message, residual=float("nan"), details=None):
        super().__init__(message)
        self.residual = residual
        self.details = details if details is not None else {}


class ResourceLimitError(RuntimeError):
    """A configured size cap (vertex count, enumeration budget) was exceeded."""
