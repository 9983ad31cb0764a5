"""Exception types raised by pilotreuse."""


class ConfigurationError(ValueError):
    """Invalid construction or run parameters."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class ValidationError(ValueError):
    """An object fails its structural invariants."""
