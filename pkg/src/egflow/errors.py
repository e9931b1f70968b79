"""Exception types raised across the package."""


class InvalidInputError(ValueError):
    """Arguments outside the documented domain of an operation."""


class InvalidMetricError(ValueError):
    """A metric that is not positive definite somewhere on the grid."""


class NotHyperbolicError(RuntimeError):
    """The quasilinear system fails the hyperbolicity test.

    ``details`` carries whatever diagnostic the caller found useful
    (classification, offending grid index, eigenvalues).
    """

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or {}


class BlowupError(RuntimeError):
    """Requested time is at or past the predicted blow-up time ``T``."""

    def __init__(self, message, blowup_time):
        super().__init__(message)
        self.blowup_time = blowup_time


class NumericalError(RuntimeError):
    """Iteration failed to converge or produced non-finite values.

    ``last_valid_time`` is set by the time-marching solvers.
    """

    def __init__(self, message, last_valid_time=None):
        super().__init__(message)
        self.last_valid_time = last_valid_time


class DegenerateRatioError(InvalidInputError):
    """A ratio invariant ``tau_m / tau_1^m`` is undefined because ``tau_1 = 0``."""
