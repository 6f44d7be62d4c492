"""Exception types shared across the package."""


class ConvergenceError(RuntimeError):
    """A numerical routine exhausted its budget before meeting tolerance."""

    def __init__(self, message, value=None, err_est=None):
        super().__init__(message)
        self.value = value
        self.err_est = err_est


class ConsistencyError(ArithmeticError):
    """A computed quantity violates a bound it is proven to satisfy."""
