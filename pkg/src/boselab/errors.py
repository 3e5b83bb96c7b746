"""Exception hierarchy shared by all modules."""


class BoseLabError(Exception):
    """Base class for errors raised by boselab."""


class GridMismatchError(BoseLabError, ValueError):
    """Two objects live on different grids or bases."""


class ValidationError(BoseLabError, ValueError):
    """An argument violates a documented precondition."""


class TimeRangeError(BoseLabError, ValueError):
    """A requested time lies outside the available trajectory."""


class IntegrationError(BoseLabError, ArithmeticError):
    """A time integrator produced non-finite values."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class CapacityError(BoseLabError):
    """A basis or state would exceed the configured size limits."""

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


class TruncationError(BoseLabError):
    """Amplitude lost to the Fock cutoff exceeds the allowed budget."""

    def __init__(self, message, loss):
        super().__init__(message)
        self.loss = loss


class KrylovError(BoseLabError, ArithmeticError):
    """The Lanczos exponential failed to reach the requested accuracy."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class ConfigError(BoseLabError, ValueError):
    """Invalid experiment configuration."""


class FormatError(BoseLabError, ValueError):
    """A serialized file has an unknown layout or version."""
