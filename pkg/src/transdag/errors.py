"""Shared exception types."""


class InvalidInputError(ValueError):
    """Raised when an operation receives structurally invalid input."""


class OptimizationDiverged(RuntimeError):
    """Raised when an objective stops producing finite values.

    Carries the last feasible iterate in ``last_x`` and, for training runs,
    the partial training log in ``log``.
    """

    def __init__(self, message, last_x=None, log=None):
        super().__init__(message)
        self.last_x = last_x
        self.log = log if log is not None else []
