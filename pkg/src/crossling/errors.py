"""Exception hierarchy shared across the toolkit.

CLI exit-code mapping: DataError -> 1, ConfigError -> 2, TransportError -> 3.
"""


class CrosslingError(Exception):
    """Base class for all toolkit errors."""


class DataError(CrosslingError):
    """Malformed, inconsistent, or insufficient input data."""


class ConfigError(CrosslingError):
    """Invalid experiment configuration or wiring."""


class TransportError(CrosslingError):
    """Wire-protocol transport failure (dead process, unreachable endpoint)."""
