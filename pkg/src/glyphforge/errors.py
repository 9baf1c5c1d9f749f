"""Exception hierarchy shared across the toolkit.

Everything raised on bad *data* derives from ``DataError`` so the CLI can
map it to exit code 2; programming errors stay ordinary Python exceptions.
"""


class GlyphforgeError(Exception):
    """Base class for all toolkit errors."""


class DataError(GlyphforgeError):
    """Invalid input data (files, records, bundles)."""


class ParseError(DataError):
    """A line-oriented text input failed to parse."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvalidRecordError(DataError):
    """A record violates its invariants (bad geometry, bad glyph, ...)."""


class EmptyTrainingSetError(DataError):
    """No training records were supplied at all."""


class BundleError(DataError):
    """A language bundle is incomplete or malformed."""


class FormatError(DataError):
    """A binary stream has a bad magic, version, or is truncated."""
