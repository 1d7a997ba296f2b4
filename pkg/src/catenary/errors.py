"""Exception hierarchy shared by all modules."""


class CatenaryError(Exception):
    """Base class for errors raised by this package."""


class DomainError(CatenaryError, ValueError):
    """Input outside the domain where an operation is defined."""


class CapacityError(CatenaryError, ValueError):
    """Input too large for an exact (exhaustive) algorithm."""


class PartitionError(CatenaryError):
    """The delta-chain graph of a sample is not connected."""

    def __init__(self, message, components):
        super().__init__(message)
        self.components = components


class DivergenceError(CatenaryError, ArithmeticError):
    """Integration produced a non-finite state."""

    def __init__(self, message, last_time):
        super().__init__(message)
        self.last_time = last_time


class SpecError(CatenaryError, ValueError):
    """A construction spec violates its own invariants."""


class BasinError(CatenaryError):
    """A forward orbit failed to approach the attractor before the horizon."""


class TruncationError(CatenaryError):
    """A quadrature or difference stencil left the domain of the flow."""


class ProjectionError(CatenaryError):
    """No bracket was found while projecting onto a local cross section."""


class ConfigError(CatenaryError, ValueError):
    """Scenario configuration could not be parsed or validated."""
