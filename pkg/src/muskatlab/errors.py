"""Exception types shared across the package."""


class MuskatLabError(Exception):
    """Base class for all package errors."""


class GeometryError(MuskatLabError):
    """Interface/boundary separation violated.

    Carries the offending minimum gap so callers can report how badly the
    configuration failed.
    """

    def __init__(self, message, min_gap=None):
        super().__init__(message)
        self.min_gap = min_gap


class MapValidityError(MuskatLabError):
    """Straightening map degenerated (d(rho)/dz below threshold)."""

    def __init__(self, message, min_dz_rho=None, threshold=None):
        super().__init__(message)
        self.min_dz_rho = min_dz_rho
        self.threshold = threshold


class SolverError(MuskatLabError):
    """Iterative solver failed to converge.

    ``residual_history`` holds the relative residual after each iteration.
    """

    def __init__(self, message, residual_history=None):
        super().__init__(message)
        self.residual_history = list(residual_history or [])


class ConfigError(MuskatLabError):
    """Configuration file is invalid; ``violations`` lists every problem found."""

    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = list(violations or [])


class CFLError(MuskatLabError):
    """Explicit time step exceeds the stability bound."""


class StabilityLossError(MuskatLabError):
    """Rayleigh-Taylor admissibility lost during a two-phase run."""

    def __init__(self, message, min_rt=None):
        super().__init__(message)
        self.min_rt = min_rt
