"""Exception types raised across the package."""


class DimensionError(ValueError):
    """Operator or state dimensions are inconsistent."""


class TruncationError(ValueError):
    """The Fock cutoff is too small for the requested state or operator."""


class IntegratorError(RuntimeError):
    """The master-equation integrator could not meet its accuracy bounds."""
