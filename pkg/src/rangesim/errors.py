"""Exception types shared across the package."""


class RangeSimError(Exception):
    """Base class for errors raised by rangesim."""


class ConfigError(RangeSimError):
    """A run/sweep/grid configuration is malformed or violates an invariant."""


class InfeasibleParameterError(RangeSimError):
    """A bound's hypothesis is violated, so the requested quantity is undefined."""
