"""Exception taxonomy shared across the engine, codecs, logger and CLI.

Every failure mode the ingestion path can hit maps to one of these types so
callers can drop-and-count instead of crashing. The CLI maps each family to
a distinct exit code (see ``touchnav.cli``).
"""


class TouchnavError(Exception):
    """Base class for all errors raised by this package."""


class MalformedMessage(TouchnavError):
    """A wire message that is not syntactically parseable."""


class SchemaViolation(TouchnavError):
    """A parseable message whose content breaks the frame schema
    (wrong landmark count, coordinate out of range, non-finite value)."""


class MalformedTrace(TouchnavError):
    """A trace file that violates the ts-trace/1 contract.

    Carries the 1-based line number of the offending line.
    """

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class IoFailure(TouchnavError):
    """An OS-level read/write failure, surfaced with the path."""


class ConfigInvalid(TouchnavError):
    """A configuration value outside its legal range."""


class EmptyMode(TouchnavError):
    """A per-mode metric was requested for a mode with no rows."""


class InsufficientData(TouchnavError):
    """Fewer than two consecutive same-mode rows: no deltas to aggregate."""


class ZeroDuration(TouchnavError):
    """A session spans zero interaction time (single frame)."""


class SchemaMismatch(TouchnavError):
    """A CSV that does not conform to the tslog/1 schema.

    Carries the name of the offending column when one can be identified.
    """

    def __init__(self, message: str, column: str | None = None):
        super().__init__(message)
        self.column = column


class SpecInvalid(TouchnavError):
    """A synthetic-trace script that cannot be realized."""
