"""Exception hierarchy. Every failure the toolkit raises deliberately derives
from SgirError so the CLI can map error classes onto exit codes."""

from __future__ import annotations


class SgirError(Exception):
    """Base class for all deliberate toolkit errors."""


class UsageError(SgirError):
    """Bad invocation: unknown flags, missing arguments, unsupported mode."""


class DataError(SgirError):
    """Malformed, inconsistent, or missing input data."""


class FormatError(DataError):
    """A file does not parse as its declared format."""


class VocabularyError(DataError):
    """A class name is absent from the supplied vocabulary."""


class ShapeError(DataError):
    """Array dimensions disagree with what an operation requires."""


class EmptyGraphError(DataError):
    """A graph lost all nodes during preprocessing."""


class IntegrityError(DataError):
    """Artifacts that must describe the same corpus do not match."""


class ConfigError(DataError):
    """A configuration value is out of its legal range."""


class SizeError(DataError):
    """A graph exceeds the exact-GED node budget."""


class NumericsError(SgirError):
    """A numeric operation produced NaN or infinity."""
