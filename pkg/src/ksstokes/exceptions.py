"""Exception hierarchy shared by every module."""


class KSStokesError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(KSStokesError, ValueError):
    pass


class ContractViolation(KSStokesError):
    """An operation was called on inputs that break its precondition."""


class SolverError(KSStokesError):
    """Iterative or direct solver failed to reach its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class StabilityError(KSStokesError):
    """Positivity clamp exceeded its budget; retry with a smaller dt."""


class ConfigError(KSStokesError, ValueError):
    pass


class SnapshotFormatError(KSStokesError):
    pass


class InvalidWindowError(KSStokesError, ValueError):
    """Rate fit window holds nonpositive values or too few samples."""
