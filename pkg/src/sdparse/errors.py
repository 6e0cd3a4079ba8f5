"""Exception types shared across the package.

The CLI maps these onto process exit codes: ConfigError -> 2,
DataError -> 3, NumericError -> 4.
"""


class ConfigError(ValueError):
    """Invalid, unknown, or inconsistent configuration."""


class DataError(ValueError):
    """Malformed input data (corpus files, graphs, embeddings)."""


class NumericError(ArithmeticError):
    """Non-finite values where finite ones are required (e.g. NaN gradients)."""


class CapacityError(ValueError):
    """Problem size exceeds a hard enumeration cap."""
