"""Exception types shared across the package."""


class SuperintError(Exception):
    """Base class for all package-specific errors."""


class DomainError(SuperintError):
    """A primitive was evaluated outside its domain (pole, branch cut, ...).

    Carries the offending primitive name and the first offending value so
    callers can report exactly what went wrong.
    """

    def __init__(self, primitive, value, message=None):
        self.primitive = primitive
        self.value = value
        super().__init__(message or f"{primitive}: argument {value!r} outside domain")


class SamplingError(SuperintError):
    """The sample domain rejected too many candidate points."""


class ConstraintError(SuperintError):
    """Catalog instantiation received missing or extra free parameters."""


class IllConditioned(SuperintError):
    """The scaled least-squares system is numerically rank deficient."""


class StepFailure(SuperintError):
    """The adaptive integrator's step size underflowed."""
