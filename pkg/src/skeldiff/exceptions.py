"""Exception types shared across the package."""


class SkeldiffError(Exception):
    """Base class for all errors raised by this package."""


class DataError(SkeldiffError):
    """Malformed datasets, invalid graphs, or incompatible saved artifacts."""


class ConfigError(SkeldiffError):
    """Invalid configuration or hyperparameter values."""


class NumericError(SkeldiffError):
    """Non-finite values encountered during optimization or inference."""
