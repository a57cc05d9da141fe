"""Desk-scale simulation of quench dynamics in the spatially deformed XXZ chain."""

__version__ = "0.1.0"

from .errors import CapabilityError, ConfigError, CurvedChainError  # noqa: E402

__all__ = ["__version__", "CapabilityError", "ConfigError", "CurvedChainError"]
