"""Exception types shared across the package."""


class HazLassoError(Exception):
    """Base class for all package-specific errors."""


class DataValidationError(HazLassoError):
    """Malformed input data (CSV rows, dictionary shapes, value ranges)."""


class ConfigError(HazLassoError):
    """Invalid simulation or constants configuration."""
