"""Exception types shared across the package.

The CLI maps these onto exit codes: ``ConfigError`` -> 2,
``CapabilityError`` -> 3, anything else -> 1.
"""


class CurvedChainError(Exception):
    """Base class for all package errors."""


class ConfigError(CurvedChainError, ValueError):
    """Invalid parameters, malformed configuration text or bad indices."""


class CapabilityError(CurvedChainError):
    """The requested run is valid but outside what a backend can do."""
