"""Exception taxonomy shared by all modules."""


class PSumReachError(Exception):
    """Base class for all library errors."""


class NotPositiveDefinite(PSumReachError):
    """Matrix failed a symmetric positive definite check."""


class DimensionMismatch(PSumReachError):
    """Operands have incompatible dimensions."""


class InvalidP(PSumReachError):
    """p outside the domain of the requested operation."""


class InvalidBeta(PSumReachError):
    """beta must be a positive real."""


class NoConvergence(PSumReachError):
    """Iteration budget exhausted before the tolerance was met."""

    def __init__(self, message, last_beta=None, residual=None):
        super().__init__(message)
        self.last_beta = last_beta
        self.residual = residual


class DegenerateImage(PSumReachError):
    """A linear map produced a shape matrix that is no longer SPD."""


class UnsupportedP(PSumReachError):
    """Operation not defined for this p (e.g. boundary points at p=inf)."""


class DegeneratePointSet(PSumReachError):
    """Point cloud does not span the space (no enclosing ellipsoid)."""


class NotOuter(PSumReachError):
    """A set assumed to be an outer approximation failed containment."""
