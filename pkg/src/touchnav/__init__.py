"""Touchless image navigation: 21-point hand-landmark streams in,
pan/rotate/zoom commands out, with frame-level telemetry and a
fluid-band metrics analyzer."""

from .engine import (
    Command,
    EffectiveConfig,
    FingerPose,
    GestureEngine,
    GestureState,
    Mode,
    ModeConfig,
    effective,
    finger_pose,
    pinch_distance,
    raw_mode,
    select_mode,
    step,
)
from .landmarks import (
    Landmark,
    LandmarkFrame,
    PixelPoint,
    decode_wire_frame,
    encode_wire_frame,
    to_pixels,
)
from .logger import FrameRecord, SessionLogger, read_log
from .metrics import (
    FluidBand,
    MetricsReport,
    Verdict,
    analyze_rows,
    classify,
    cmd_gen_ratio,
    latency_and_fps,
    rms_jitter,
    switching_rate,
)
from .trace import read_trace, write_trace

__version__ = "0.1.0"

__all__ = [
    "Command", "EffectiveConfig", "FingerPose", "FluidBand", "FrameRecord",
    "GestureEngine", "GestureState", "Landmark", "LandmarkFrame", "MetricsReport",
    "Mode", "ModeConfig", "PixelPoint", "SessionLogger", "Verdict",
    "analyze_rows", "classify", "cmd_gen_ratio", "decode_wire_frame", "effective",
    "encode_wire_frame", "finger_pose", "latency_and_fps", "pinch_distance",
    "raw_mode", "read_log", "read_trace", "rms_jitter", "select_mode", "step",
    "switching_rate", "to_pixels", "write_trace",
]
