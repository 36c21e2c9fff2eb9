"""Exception and warning types shared across the package."""


class ValidationError(ValueError):
    """Invalid input data, incompatible dimensions, or an out-of-range parameter."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its accuracy target."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class ExplosionGuardError(ValidationError):
    """Brute-force enumeration would exceed the walk-count budget."""


class ConvergenceWarning(UserWarning):
    """A computation proceeded without a certified convergence radius."""
