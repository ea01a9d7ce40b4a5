"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


class UnsupportedMechanismError(ValidationError):
    """Raised when an operation is asked to run with a noise mechanism it
    does not support (the asymptotic tests are Gaussian-only)."""


class NumericError(ArithmeticError):
    """Raised when a numerical routine fails to converge.

    ``diagnostics`` carries whatever the routine knew at the time of failure
    (residuals, brackets, iteration counts).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
