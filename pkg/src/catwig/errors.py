"""Exception hierarchy shared by every catwig module.

Each class carries the process exit code the CLI maps it to.
"""


class CatwigError(Exception):
    exit_code = 1


class ValidationError(CatwigError, ValueError):
    """An input value is outside its allowed range."""

    exit_code = 2


class ConfigurationError(CatwigError, ValueError):
    """A configuration is structurally incomplete or self-contradictory."""

    exit_code = 2


class IngestionError(ConfigurationError):
    """A catalog or config file could not be read into records."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConvergenceError(CatwigError, ArithmeticError):
    """A numerical procedure did not reach its accuracy gate."""

    exit_code = 3


class GridError(ConvergenceError):
    """The phase-space grid is too small or too coarse for the state."""

    def __init__(self, message, suggested_bounds=None):
        if suggested_bounds is not None:
            message = f"{message} (suggested bounds: +/-{suggested_bounds:.3g})"
        super().__init__(message)
        self.suggested_bounds = suggested_bounds


class ResolutionError(ConvergenceError):
    pass


class EstimationError(ConvergenceError):
    """Too few or degenerate records to estimate a visibility."""


class DomainError(CatwigError, ValueError):
    """Inputs fall outside the validity domain of a physical model."""

    exit_code = 4


class ProjectionError(DomainError):
    """Photon post-selection onto a (near) null cantilever state."""


class InstabilityError(DomainError):
    """Net mechanical damping is not positive (anti-damping regime)."""
