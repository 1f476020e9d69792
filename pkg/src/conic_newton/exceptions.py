"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """An input vector or matrix has the wrong shape for the target object."""


class NumericalFailureError(RuntimeError):
    """A solve produced non-finite values or diverged.

    Carries the iteration index at which the failure was detected.
    """

    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message)
        self.iteration = iteration
