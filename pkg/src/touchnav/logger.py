"""Per-frame session logging in the ``tslog/1`` CSV schema.

One row per ingested frame — active modes, empty actions and hand-absent
frames alike — so the whole interaction timeline, including the switching
denominator, is recoverable from the log alone. Rows are handed to a writer
thread through a bounded queue: flushing never runs on the engine's frame
budget, and when the queue fills the producer stalls rather than losing rows.

The schema is the contract between logger and analyzer:

    # schema=tslog/1
    session_id,frame_id,t_capture_us,mode,action,tip_x_px,tip_y_px,rel_depth,pinch_px,proc_ms,render_ms

Numeric fields use shortest round-trip float formatting, so a re-parse
reproduces every value exactly. ``action`` is empty for empty actions and
``render_ms`` is empty when no viewer acknowledged the frame; geometry
fields are empty on hand-absent rows.
"""

from __future__ import annotations

import os
import queue
import threading
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .engine import Mode
from .errors import IoFailure, SchemaMismatch

LOG_SCHEMA = "tslog/1"
LOG_SCHEMA_LINE = f"# schema={LOG_SCHEMA}"
LOG_COLUMNS = (
    "session_id", "frame_id", "t_capture_us", "mode", "action",
    "tip_x_px", "tip_y_px", "rel_depth", "pinch_px", "proc_ms", "render_ms",
)
LOG_HEADER = ",".join(LOG_COLUMNS)

_SENTINEL = object()


@dataclass(frozen=True)
class FrameRecord:
    """One log row: what the engine saw and did for a single frame."""

    session_id: str
    frame_id: int
    t_capture_us: int
    mode: Mode
    action: str = ""
    tip_x_px: float | None = None
    tip_y_px: float | None = None
    rel_depth: float | None = None
    pinch_px: float | None = None
    proc_ms: float = 0.0
    render_ms: float | None = None

    def validate(self) -> None:
        if self.action and self.mode is Mode.NONE:
            raise SchemaMismatch("non-empty action requires an active mode", column="action")
        if self.proc_ms < 0:
            raise SchemaMismatch("proc_ms must be >= 0", column="proc_ms")
        if self.render_ms is not None and self.render_ms < 0:
            raise SchemaMismatch("render_ms must be >= 0", column="render_ms")
        if "," in self.session_id or "\n" in self.session_id:
            raise SchemaMismatch("session_id must not contain ',' or newlines", column="session_id")


@dataclass
class SessionSummary:
    """Totals reported when a session closes."""

    session_id: str
    frame_count: int = 0
    wall_time_us: int = 0
    mode_counts: dict[str, int] = field(default_factory=dict)


def _num(v: float | int | None) -> str:
    if v is None:
        return ""
    return repr(float(v)) if isinstance(v, float) else str(v)


def format_row(r: FrameRecord) -> str:
    return ",".join((
        r.session_id,
        str(r.frame_id),
        str(r.t_capture_us),
        r.mode.value,
        r.action,
        _num(r.tip_x_px),
        _num(r.tip_y_px),
        _num(r.rel_depth),
        _num(r.pinch_px),
        _num(r.proc_ms),
        _num(r.render_ms),
    ))


class SessionLogger:
    """Buffered single-writer CSV logger for one session.

    I/O failures are captured on the writer thread and re-raised when the
    session closes, never mid-stream.
    """

    def __init__(self, path: str | os.PathLike, session_id: str, queue_size: int = 1024):
        self.session_id = session_id
        self.path = path
        self._queue: queue.Queue = queue.Queue(maxsize=queue_size)
        self._error: Exception | None = None
        self._summary = SessionSummary(session_id=session_id)
        self._first_t: int | None = None
        self._last_t: int | None = None
        self._closed = False
        try:
            self._fh = open(path, "w", encoding="utf-8", newline="")
            self._fh.write(LOG_SCHEMA_LINE + "\n")
            self._fh.write(LOG_HEADER + "\n")
        except OSError as e:
            raise IoFailure(f"cannot open log {path}: {e}") from e
        self._thread = threading.Thread(target=self._writer, name="tslog-writer", daemon=True)
        self._thread.start()

    def _writer(self) -> None:
        while True:
            item = self._queue.get()
            if item is _SENTINEL:
                return
            if self._error is not None:
                continue  # drain without writing; error surfaces at close
            try:
                self._fh.write(item)
            except OSError as e:
                self._error = IoFailure(f"cannot write log {self.path}: {e}")

    def log_frame(self, record: FrameRecord) -> None:
        """Queue one row, in frame order. Blocks if the writer is behind."""
        if self._closed:
            raise IoFailure("session already closed")
        record.validate()
        self._queue.put(format_row(record) + "\n")
        self._summary.frame_count += 1
        self._summary.mode_counts[record.mode.value] = (
            self._summary.mode_counts.get(record.mode.value, 0) + 1
        )
        if self._first_t is None:
            self._first_t = record.t_capture_us
        self._last_t = record.t_capture_us

    def close(self) -> SessionSummary:
        """Flush everything, finalize the CSV and return the totals."""
        if self._closed:
            return self._summary
        self._closed = True
        self._queue.put(_SENTINEL)
        self._thread.join()
        try:
            self._fh.close()
        except OSError as e:
            if self._error is None:
                self._error = IoFailure(f"cannot finalize log {self.path}: {e}")
        if self._error is not None:
            raise self._error
        if self._first_t is not None and self._last_t is not None:
            self._summary.wall_time_us = self._last_t - self._first_t
        return self._summary

    def __enter__(self) -> "SessionLogger":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.close()


def _parse_float(value: str, column: str, line_no: int) -> float | None:
    if value == "":
        return None
    try:
        return float(value)
    except ValueError:
        raise SchemaMismatch(f"line {line_no}: bad value {value!r}", column=column) from None


def _parse_int(value: str, column: str, line_no: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise SchemaMismatch(f"line {line_no}: bad value {value!r}", column=column) from None


def iter_log_rows(path: str | os.PathLike) -> Iterator[FrameRecord]:
    """Parse a tslog/1 CSV back into FrameRecords.

    Comment lines and repeated header lines are skipped anywhere in the
    file, so plain concatenation of session CSVs is itself a valid log.
    """
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as e:
        raise IoFailure(f"cannot read log {path}: {e}") from e
    with fh:
        saw_header = False
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            if line.startswith("#"):
                tag = line.lstrip("# ").strip()
                if tag.startswith("schema=") and tag != f"schema={LOG_SCHEMA}":
                    raise SchemaMismatch(f"unsupported log schema {tag!r}")
                continue
            if line == LOG_HEADER:
                saw_header = True
                continue
            if not saw_header:
                # First non-comment line is not the expected header: name
                # the first column that disagrees.
                got = line.split(",")
                for i, want in enumerate(LOG_COLUMNS):
                    if i >= len(got) or got[i] != want:
                        raise SchemaMismatch(
                            f"missing or wrong header: expected column {want!r}", column=want
                        )
                raise SchemaMismatch("missing or wrong header")
            parts = line.split(",")
            if len(parts) != len(LOG_COLUMNS):
                raise SchemaMismatch(
                    f"line {line_no}: expected {len(LOG_COLUMNS)} fields, got {len(parts)}"
                )
            try:
                mode = Mode(parts[3])
            except ValueError:
                raise SchemaMismatch(f"line {line_no}: unknown mode {parts[3]!r}", column="mode") from None
            proc = _parse_float(parts[9], "proc_ms", line_no)
            yield FrameRecord(
                session_id=parts[0],
                frame_id=_parse_int(parts[1], "frame_id", line_no),
                t_capture_us=_parse_int(parts[2], "t_capture_us", line_no),
                mode=mode,
                action=parts[4],
                tip_x_px=_parse_float(parts[5], "tip_x_px", line_no),
                tip_y_px=_parse_float(parts[6], "tip_y_px", line_no),
                rel_depth=_parse_float(parts[7], "rel_depth", line_no),
                pinch_px=_parse_float(parts[8], "pinch_px", line_no),
                proc_ms=proc if proc is not None else 0.0,
                render_ms=_parse_float(parts[10], "render_ms", line_no),
            )


def read_log(paths: str | os.PathLike | Iterable[str | os.PathLike]) -> list[FrameRecord]:
    """Load one or more tslog/1 CSVs into memory, in file order."""
    if isinstance(paths, (str, os.PathLike)):
        paths = [paths]
    rows: list[FrameRecord] = []
    for p in paths:
        rows.extend(iter_log_rows(p))
    return rows
