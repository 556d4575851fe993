"""Exception types shared across the package."""


class InsufficientDepthError(ValueError):
    """Raised when finite prefixes do not determine the requested quantity."""


class PoleError(ArithmeticError):
    """Raised when a closed-form coefficient is evaluated at its pole."""


class ConvergenceError(ArithmeticError):
    """Raised when an iterative eigenvector solve does not converge."""


class CapacityError(ValueError):
    """Raised when a request exceeds the sizes this package supports."""
