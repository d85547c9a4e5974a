"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the domain of a special function or density."""


class DegenerateTriangleError(ValueError):
    """Three points (or side lengths) that do not span a proper triangle."""


class ConvergenceError(RuntimeError):
    """An iterative numerical routine stopped before meeting its tolerance.

    The best available estimate is kept on ``estimate`` so callers can
    still report it.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate
