"""Exception types shared across the package."""


class StructuralError(ValueError):
    """Input violates a structural requirement (symmetry, dimension, class invariant)."""


class DomainError(ValueError):
    """Argument lies outside the domain of an operation."""


class ConfigError(ValueError):
    """Invalid or inconsistent configuration.

    ``field`` names the offending configuration entry when known.
    """

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class NumericError(RuntimeError):
    """A numerical routine failed to reach its accuracy target.

    Carries the value reached and the error estimate so callers can decide
    whether the result is still usable.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(f"{message} (estimate={estimate!r}, error={error!r})")
        self.estimate = estimate
        self.error = error


class SingularityError(NumericError):
    """A matrix that must be invertible is numerically singular."""
