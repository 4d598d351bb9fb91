"""Exception types raised across the package."""


class DiskflowError(Exception):
    """Base class for all package errors."""


class ValidationError(DiskflowError, ValueError):
    """Raised when generator parameters violate the admissible range."""


class AdmissibilityError(DiskflowError):
    """Raised when a vector field fails the Berkson-Porta positivity check."""


class IntegrationError(DiskflowError):
    """Raised when the ODE integrator cannot complete a requested horizon.

    Carries the partial results so callers can inspect how far the flow got.
    """

    def __init__(self, message, times=None, points=None, status=0):
        super().__init__(message)
        self.times = times
        self.points = points
        self.status = status


class QuadratureError(DiskflowError):
    """Raised when an integral used for a Koenigs map fails to converge."""
