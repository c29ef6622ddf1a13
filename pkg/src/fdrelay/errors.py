"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Raised when array shapes are not conformable or a matrix is not square/Hermitian."""


class DomainError(ValueError):
    """Raised when a numerical argument lies outside the supported domain."""


class UnsupportedConfigError(ValueError):
    """Raised when a scheme cannot be applied to the given antenna configuration."""


class ResourceError(RuntimeError):
    """Raised when an exact expansion would exceed its size cap."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative routine hits its iteration cap.

    The best available estimate and its error bound are kept on the
    exception so callers can decide whether to use them anyway.
    """

    def __init__(self, message, estimate=float("nan"), error=float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
