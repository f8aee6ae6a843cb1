"""Landmark data model, pixel scaling and the ts-trace/1 wire codec.

A frame is one timestamped sample of 21 normalized 2.5D hand landmarks plus
the source image dimensions. Frames arrive either live over a stream socket
or from recorded trace files; both use the same newline-delimited JSON line
format:

    {"frame_id":u64,"t_capture_us":u64,"w":u32,"h":u32,"hand":bool,"lm":[[x,y,z]x21]}

``lm`` is omitted when ``hand`` is false. Encoding is deterministic: the
same frame always serializes to the same bytes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import MalformedMessage, SchemaViolation

# Standard 21-point hand model indices. The tracker names fingers; code
# works in indices: 0 = wrist, tips at 4/8/12/16/20, pip joints one short.
WRIST = 0
TIP = {"thumb": 4, "index": 8, "middle": 12, "ring": 16, "little": 20}
PIP = {"thumb": 3, "index": 6, "middle": 10, "ring": 14, "little": 18}
FINGERS = ("thumb", "index", "middle", "ring", "little")
LANDMARK_COUNT = 21

WIRE_SCHEMA = "ts-trace/1"


@dataclass(frozen=True)
class Landmark:
    """One 2.5D point: normalized image coordinates plus relative depth.

    ``z`` follows the tracker convention that more-negative values are
    closer to the camera; it is dimensionless and unbounded but finite.
    """

    x: float
    y: float
    z: float


@dataclass(frozen=True)
class PixelPoint:
    x_p: float
    y_p: float


@dataclass(frozen=True)
class LandmarkFrame:
    """One validated sample from the tracker.

    ``landmarks`` holds exactly 21 entries when ``hand_present`` is true and
    is empty otherwise. ``t_capture_us`` is a monotonic timestamp in
    microseconds (engine clock domain once a bridge handshake has run).
    """

    frame_id: int
    t_capture_us: int
    width: int
    height: int
    hand_present: bool
    landmarks: tuple[Landmark, ...] = ()

    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)


def to_pixels(lm: Landmark, width: int, height: int) -> PixelPoint:
    """Scale normalized coordinates to pixels: (x*W, y*H).

    Fractional pixels are retained on purpose; rounding would quantize the
    frame-to-frame deltas the jitter metric is built on.
    """
    return PixelPoint(lm.x * width, lm.y * height)


def _is_finite_number(v: object) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def validate_frame(frame: LandmarkFrame) -> None:
    """Raise SchemaViolation unless ``frame`` satisfies every invariant."""
    if frame.width < 1 or frame.height < 1:
        raise SchemaViolation(f"image dimensions must be >= 1, got {frame.width}x{frame.height}")
    if frame.frame_id < 0 or frame.t_capture_us < 0:
        raise SchemaViolation("frame_id and t_capture_us must be non-negative")
    if frame.hand_present:
        if len(frame.landmarks) != LANDMARK_COUNT:
            raise SchemaViolation(
                f"expected {LANDMARK_COUNT} landmarks, got {len(frame.landmarks)}"
            )
        for i, lm in enumerate(frame.landmarks):
            if not (_is_finite_number(lm.x) and _is_finite_number(lm.y) and _is_finite_number(lm.z)):
                raise SchemaViolation(f"landmark {i} has a non-finite coordinate")
            if not (0.0 <= lm.x <= 1.0 and 0.0 <= lm.y <= 1.0):
                raise SchemaViolation(
                    f"landmark {i} out of range: x={lm.x!r} y={lm.y!r}"
                )
    elif frame.landmarks:
        raise SchemaViolation("hand_present is false but landmarks are present")


def encode_wire_frame(frame: LandmarkFrame) -> bytes:
    """Serialize one frame to a single JSON line (newline included).

    Deterministic: identical frames produce identical bytes. Floats use
    Python's shortest round-trip representation, so decode(encode(f)) == f
    at the field level.
    """
    obj: dict = {
        "frame_id": frame.frame_id,
        "t_capture_us": frame.t_capture_us,
        "w": frame.width,
        "h": frame.height,
        "hand": frame.hand_present,
    }
    if frame.hand_present:
        obj["lm"] = [[lm.x, lm.y, lm.z] for lm in frame.landmarks]
    return (json.dumps(obj, separators=(",", ":"), allow_nan=False) + "\n").encode("utf-8")


def decode_wire_frame(data: bytes | str) -> LandmarkFrame:
    """Parse and validate one wire line.

    Raises MalformedMessage for anything that is not a JSON object with the
    required fields and types, SchemaViolation for content that breaks the
    frame invariants. Never raises anything else, whatever the input.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise MalformedMessage(f"not valid UTF-8: {e}") from e
    try:
        obj = json.loads(data)
    except (json.JSONDecodeError, RecursionError) as e:
        raise MalformedMessage(f"invalid JSON: {e}") from e
    if not isinstance(obj, dict):
        raise MalformedMessage("message is not a JSON object")

    def _int_field(name: str) -> int:
        v = obj.get(name)
        if not isinstance(v, int) or isinstance(v, bool):
            raise MalformedMessage(f"field {name!r} missing or not an integer")
        return v

    frame_id = _int_field("frame_id")
    t_capture_us = _int_field("t_capture_us")
    width = _int_field("w")
    height = _int_field("h")
    hand = obj.get("hand")
    if not isinstance(hand, bool):
        raise MalformedMessage("field 'hand' missing or not a boolean")

    landmarks: tuple[Landmark, ...] = ()
    raw_lm = obj.get("lm")
    if hand:
        if not isinstance(raw_lm, list):
            raise MalformedMessage("field 'lm' missing or not an array")
        if len(raw_lm) != LANDMARK_COUNT:
            raise SchemaViolation(f"expected {LANDMARK_COUNT} landmarks, got {len(raw_lm)}")
        pts = []
        for i, entry in enumerate(raw_lm):
            if not isinstance(entry, list) or len(entry) != 3:
                raise MalformedMessage(f"landmark {i} is not an [x,y,z] triple")
            if not all(_is_finite_number(v) for v in entry):
                raise SchemaViolation(f"landmark {i} has a non-finite coordinate")
            pts.append(Landmark(float(entry[0]), float(entry[1]), float(entry[2])))
        landmarks = tuple(pts)
    elif raw_lm:
        raise SchemaViolation("hand is false but 'lm' is present")

    frame = LandmarkFrame(
        frame_id=frame_id,
        t_capture_us=t_capture_us,
        width=width,
        height=height,
        hand_present=hand,
        landmarks=landmarks,
    )
    validate_frame(frame)
    return frame
