"""Exception types shared across the toolkit."""

from __future__ import annotations


class LionForgeError(Exception):
    """Base class for all lion-forge errors."""


class ValidationError(LionForgeError):
    """Bad configuration, malformed input, or a violated contract."""


class IncompleteInputError(LionForgeError):
    """Strict-mode failure: required records or matrix cells are missing."""
