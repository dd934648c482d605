"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Raised when a config object or scenario file fails validation."""


class SimulationError(RuntimeError):
    """Raised on internal consistency violations (bug traps), never on
    modeled outcomes such as packet drops."""
