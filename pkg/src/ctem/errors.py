"""Exception types shared across the runtime."""

from __future__ import annotations


class CtemError(Exception):
    """Base class for all runtime errors."""


class InvalidProfileError(CtemError):
    """A personality profile carries an out-of-range or malformed value."""


class ValidationError(CtemError):
    """A document failed schema validation.

    ``field`` names the offending field path when known.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class ParseError(CtemError):
    """A document could not be parsed at all."""


class EmptyPoolError(CtemError):
    """No eligible behavior exists for the current state."""


class NoCandidatesError(CtemError):
    """select_present called with an empty candidate list."""


class DuplicateDayError(CtemError):
    """A daily summary for this day is already stored."""


class EmptyVotesError(CtemError):
    """Consensus requires at least one vote."""


class LexiconMissingError(CtemError):
    """The safety keyword lexicon file is absent at startup."""


class MissingRulesError(CtemError):
    """Prompt composition requires the dialog rules section."""


class GeneratorUnavailableError(CtemError):
    """The text generator failed or timed out."""


class SnapshotVersionError(CtemError):
    """Snapshot schema version is unsupported."""


class SnapshotCorruptError(CtemError):
    """Snapshot checksum mismatch."""


class ConfigError(CtemError):
    """Engine configuration is invalid or references missing files.

    ``path`` carries the offending file path when the failure is file-related.
    """

    def __init__(self, message: str, path: str | None = None):
        super().__init__(message)
        self.path = path
