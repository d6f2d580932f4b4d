"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented invariant or precondition."""


class ConvergenceError(ArithmeticError):
    """An iterative numerical routine failed to converge."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index
