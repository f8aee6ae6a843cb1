"""Offline runtimes: deterministic trace replay and record-to-trace.

Replay drives the engine with a virtual clock: frame timestamps come from
the trace, and the logged processing latency is the measured engine cost
only (no capture or landmark inference happens here), which reports must
label. The command log it writes is a pure function of trace plus config,
so repeated replays are byte-identical.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

from .engine import (
    TRACKING_FINGER,
    Command,
    GestureEngine,
    Mode,
    ModeConfig,
    finger_pose,
    pinch_distance,
    to_pixels,
)
from .errors import IoFailure
from .landmarks import TIP, LandmarkFrame
from .logger import FrameRecord, SessionLogger, SessionSummary, read_log
from .metrics import MetricsReport, analyze_rows
from .trace import read_trace

ENGINE_ONLY_NOTE = "engine-only (replay: no capture or landmark inference in proc_ms)"


def frame_features(frame: LandmarkFrame, mode: Mode) -> tuple[float | None, float | None, float | None, float | None]:
    """Log-row geometry for a frame: tracked tip x/y, rel depth, pinch px."""
    if not frame.hand_present:
        return None, None, None, None
    finger = TRACKING_FINGER[mode]
    tip = to_pixels(frame.landmarks[TIP[finger]], frame.width, frame.height)
    pose = finger_pose(frame)
    return tip.x_p, tip.y_p, pose.rel_depth[finger], pinch_distance(frame)


def command_log_line(frame_id: int, mode: Mode, command: Command) -> str:
    """Deterministic one-line JSON rendering of a frame's outcome."""
    obj: dict = {"frame_id": frame_id, "mode": mode.value, "kind": command.kind.value}
    if command.kind is not Mode.NONE:
        obj["dx"] = command.dx
        obj["dy"] = command.dy
        obj["dzoom"] = command.dzoom
    return json.dumps(obj, separators=(",", ":"))


@dataclass
class ReplayResult:
    report: MetricsReport
    summary: SessionSummary
    frames: int
    mean_step_ms: float
    wall_seconds: float


def run_replay(
    trace_path,
    cfg: ModeConfig | None = None,
    log_path=None,
    commands_path=None,
    session_id: str = "replay",
    realtime: bool = False,
) -> ReplayResult:
    """Replay a trace through the engine, logging every frame.

    Returns the analyzed metrics of the session just written. ``realtime``
    paces frames by their capture timestamps instead of running flat out.
    """
    cfg = cfg or ModeConfig()
    engine = GestureEngine(cfg)
    if log_path is None:
        raise IoFailure("replay requires a log path")
    logger = SessionLogger(log_path, session_id)
    cmd_fh = None
    if commands_path is not None:
        try:
            cmd_fh = open(commands_path, "w", encoding="utf-8", newline="")
        except OSError as e:
            raise IoFailure(f"cannot write command log {commands_path}: {e}") from e

    frames = 0
    step_ns_total = 0
    width, height = 1280, 720
    t_wall0 = time.perf_counter()
    prev_capture_us: int | None = None
    try:
        for frame in read_trace(trace_path):
            if realtime and prev_capture_us is not None:
                time.sleep(max(0, (frame.t_capture_us - prev_capture_us)) / 1e6)
            prev_capture_us = frame.t_capture_us
            width, height = frame.width, frame.height

            t0 = time.perf_counter_ns()
            command = engine.process(frame)
            mode = engine.state.mode
            tip_x, tip_y, rel_depth, pinch_px = frame_features(frame, mode)
            step_ns = time.perf_counter_ns() - t0
            step_ns_total += step_ns
            frames += 1

            logger.log_frame(FrameRecord(
                session_id=session_id,
                frame_id=frame.frame_id,
                t_capture_us=frame.t_capture_us,
                mode=mode,
                action=command.kind.value if command.kind is not Mode.NONE else "",
                tip_x_px=tip_x,
                tip_y_px=tip_y,
                rel_depth=rel_depth,
                pinch_px=pinch_px,
                proc_ms=step_ns / 1e6,
            ))
            if cmd_fh is not None:
                cmd_fh.write(command_log_line(frame.frame_id, mode, command) + "\n")
    finally:
        if cmd_fh is not None:
            cmd_fh.close()
        summary = logger.close()

    wall = time.perf_counter() - t_wall0
    report = analyze_rows(read_log(log_path), width, height, timing_note=ENGINE_ONLY_NOTE)
    return ReplayResult(
        report=report,
        summary=summary,
        frames=frames,
        mean_step_ms=(step_ns_total / frames / 1e6) if frames else 0.0,
        wall_seconds=wall,
    )
