"""Reader/writer for recorded landmark traces (``ts-trace/1``).

A trace is the wire format persisted line-by-line to an ``.ndjson`` file,
optionally preceded by ``#`` comment lines; the first comment conventionally
carries the schema tag. ``read_trace(write_trace(frames))`` reproduces every
field exactly.
"""

from __future__ import annotations

import os
from typing import Iterable, Iterator

from .errors import IoFailure, MalformedTrace, TouchnavError
from .landmarks import WIRE_SCHEMA, LandmarkFrame, decode_wire_frame, encode_wire_frame

TRACE_HEADER = f"# {WIRE_SCHEMA}\n"


def write_trace(path: str | os.PathLike, frames: Iterable[LandmarkFrame]) -> int:
    """Write frames to ``path``, one wire line each. Returns the frame count.

    Frames must already be valid and in strictly increasing frame_id order;
    violations raise before anything past the offending frame is written.
    """
    count = 0
    last_id: int | None = None
    last_t: int | None = None
    try:
        with open(path, "wb") as fh:
            fh.write(TRACE_HEADER.encode("utf-8"))
            for frame in frames:
                if last_id is not None and frame.frame_id <= last_id:
                    raise TouchnavError(
                        f"frame_id must strictly increase: {frame.frame_id} after {last_id}"
                    )
                if last_t is not None and frame.t_capture_us < last_t:
                    raise TouchnavError(
                        f"t_capture_us must be non-decreasing: {frame.t_capture_us} after {last_t}"
                    )
                fh.write(encode_wire_frame(frame))
                last_id, last_t = frame.frame_id, frame.t_capture_us
                count += 1
    except OSError as e:
        raise IoFailure(f"cannot write trace {path}: {e}") from e
    return count


def read_trace(path: str | os.PathLike) -> Iterator[LandmarkFrame]:
    """Yield frames from a trace file in frame_id order.

    Raises MalformedTrace (with line number) on syntax or ordering
    violations, IoFailure on OS errors. An empty file is an empty trace.
    """
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as e:
        raise IoFailure(f"cannot read trace {path}: {e}") from e
    with fh:
        last_id: int | None = None
        last_t: int | None = None
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                tag = line.lstrip("# ").strip()
                if tag.startswith("ts-trace/") and tag != WIRE_SCHEMA:
                    raise MalformedTrace(f"unsupported trace schema {tag!r}", line_no)
                continue
            try:
                frame = decode_wire_frame(line)
            except TouchnavError as e:
                raise MalformedTrace(str(e), line_no) from e
            if last_id is not None and frame.frame_id <= last_id:
                raise MalformedTrace(
                    f"frame_id must strictly increase: {frame.frame_id} after {last_id}", line_no
                )
            if last_t is not None and frame.t_capture_us < last_t:
                raise MalformedTrace(
                    f"t_capture_us must be non-decreasing: {frame.t_capture_us} after {last_t}",
                    line_no,
                )
            last_id, last_t = frame.frame_id, frame.t_capture_us
            yield frame
