import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from touchnav.errors import MalformedMessage, SchemaViolation, TouchnavError
from touchnav.landmarks import (
    LANDMARK_COUNT,
    Landmark,
    LandmarkFrame,
    decode_wire_frame,
    encode_wire_frame,
    to_pixels,
    validate_frame,
)

from conftest import make_frame, make_hand


def test_to_pixels_midpoint():
    p = to_pixels(Landmark(0.5, 0.5, 0.0), 1280, 720)
    assert (p.x_p, p.y_p) == (640.0, 360.0)


def test_to_pixels_corner():
    p = to_pixels(Landmark(0.0, 1.0, 0.0), 1280, 720)
    assert (p.x_p, p.y_p) == (0.0, 720.0)


def test_to_pixels_fractional():
    # independent scalar multiplication: 0.37*1280, 0.81*720
    p = to_pixels(Landmark(0.37, 0.81, 0.0), 1280, 720)
    assert abs(p.x_p - 473.6) < 1e-9
    assert abs(p.y_p - 583.2) < 1e-9


@given(x=st.floats(0.0, 0.5), w=st.integers(1, 4096))
def test_to_pixels_linearity(x, w):
    # doubling the normalized coordinate doubles the pixel coordinate
    one = to_pixels(Landmark(x, 0.0, 0.0), w, 1)
    two = to_pixels(Landmark(2 * x, 0.0, 0.0), w, 1)
    assert two.x_p == 2 * one.x_p


_coord = st.floats(0.0, 1.0, allow_nan=False)
_depth = st.floats(-10.0, 10.0, allow_nan=False, allow_infinity=False)


@st.composite
def frames(draw):
    hand = draw(st.booleans())
    lms = ()
    if hand:
        lms = tuple(
            Landmark(draw(_coord), draw(_coord), draw(_depth))
            for _ in range(LANDMARK_COUNT)
        )
    return LandmarkFrame(
        frame_id=draw(st.integers(0, 2**48)),
        t_capture_us=draw(st.integers(0, 2**48)),
        width=draw(st.integers(1, 8192)),
        height=draw(st.integers(1, 8192)),
        hand_present=hand,
        landmarks=lms,
    )


@given(frames())
@settings(max_examples=200)
def test_wire_round_trip(frame):
    assert decode_wire_frame(encode_wire_frame(frame)) == frame


def test_wire_encoding_deterministic():
    f = make_frame(frame_id=7, t_us=123456)
    assert encode_wire_frame(f) == encode_wire_frame(f)


def test_empty_hand_omits_landmark_array():
    raw = encode_wire_frame(make_frame(hand=False))
    assert b'"lm"' not in raw
    assert decode_wire_frame(raw).hand_present is False


def test_wrong_landmark_count_rejected():
    f = make_frame()
    obj = json.loads(encode_wire_frame(f))
    obj["lm"] = obj["lm"][:20]
    with pytest.raises(SchemaViolation):
        decode_wire_frame(json.dumps(obj))


def test_out_of_range_coordinate_rejected():
    f = make_frame()
    obj = json.loads(encode_wire_frame(f))
    obj["lm"][3][0] = 1.3
    with pytest.raises(SchemaViolation):
        decode_wire_frame(json.dumps(obj))


def test_non_finite_rejected():
    f = make_frame()
    obj = json.loads(encode_wire_frame(f))
    obj["lm"][3][2] = float("nan")
    with pytest.raises(SchemaViolation):
        decode_wire_frame(json.dumps(obj).replace("NaN", "NaN"))


def test_lm_present_with_hand_false_rejected():
    raw = json.dumps({"frame_id": 0, "t_capture_us": 0, "w": 10, "h": 10,
                      "hand": False, "lm": [[0.1, 0.1, 0.0]]})
    with pytest.raises(SchemaViolation):
        decode_wire_frame(raw)


@pytest.mark.parametrize("payload", [
    b"", b"not json", b"[1,2,3]", b'{"frame_id": "x"}',
    b'{"frame_id":1,"t_capture_us":0,"w":1,"h":1}',  # missing hand
    b"\xff\xfe garbage \x00",
])
def test_malformed_messages(payload):
    with pytest.raises(MalformedMessage):
        decode_wire_frame(payload)


@given(st.binary(max_size=300))
@settings(max_examples=300)
def test_validation_totality(data):
    # any byte sequence either parses or raises a typed error, never crashes
    try:
        frame = decode_wire_frame(data)
        assert isinstance(frame, LandmarkFrame)
    except TouchnavError:
        pass


def test_validate_frame_dimensions():
    with pytest.raises(SchemaViolation):
        validate_frame(make_frame(width=0))


def test_validate_out_of_range_y():
    lms = list(make_hand())
    lms[5] = Landmark(0.5, 1.5, 0.0)
    with pytest.raises(SchemaViolation):
        validate_frame(make_frame(landmarks=tuple(lms)))


def test_diagonal():
    assert make_frame().diagonal() == math.hypot(1280, 720)
