"""Exception types raised across the package."""


class HelmbieError(Exception):
    """Base class for all package errors."""


class DomainError(HelmbieError, ValueError):
    """Argument outside the domain of a function (e.g. on the branch cut)."""


class SeriesTruncationError(HelmbieError, ArithmeticError):
    """An entire series did not reach its tail tolerance within the term cap."""

    def __init__(self, message, last_term):
        super().__init__(f"{message} (last term magnitude {last_term:.3e})")
        self.last_term = last_term


class SingularityError(HelmbieError, ValueError):
    """Evaluation requested at the pole of a fundamental solution."""


class GeometryError(HelmbieError, ValueError):
    """Irregular, self-intersecting or overlapping boundary description."""


class UnsupportedDomainError(HelmbieError, ValueError):
    """Requested quadrature is not available for this domain."""


class NearBoundaryError(HelmbieError, ValueError):
    """Point too close to the boundary for plain quadrature."""


class CapacityError(HelmbieError, ArithmeticError):
    """The augmented first-kind system for the Dirichlet-to-Neumann map is singular."""


class IncompatibleDataError(HelmbieError, ArithmeticError):
    """Neumann datum does not annihilate the numerical cokernel."""

    def __init__(self, message, sigma_min, defect):
        super().__init__(message)
        self.sigma_min = sigma_min
        self.defect = defect


class NotAtDipError(HelmbieError, ValueError):
    """Eigenfunction extraction requested away from a breakdown wavenumber."""


class ConfigError(HelmbieError, ValueError):
    """Malformed run configuration."""
