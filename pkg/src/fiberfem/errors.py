"""Exception types shared across the package."""


class FiberFemError(Exception):
    """Base class for all package specific errors."""


class CapacityError(FiberFemError):
    """Requested discretization exceeds the configured size guard."""


class OutOfDomainError(FiberFemError):
    """A queried point or quadrature node lies outside the unit cube."""


class TubeValidityError(FiberFemError):
    """Fiber radius is too large for the curvature of its centerline."""


class OverlapError(FiberFemError):
    """Generated fibers would overlap each other."""


class ConvergenceError(FiberFemError):
    """An iterative solver failed to reach the requested tolerance."""

    def __init__(self, message, residual_history=None):
        super().__init__(message)
        self.residual_history = list(residual_history or [])
