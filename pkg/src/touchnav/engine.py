"""Per-frame gesture state machine.

Each landmark frame is reduced to a finger pose (extension flags plus
relative depths anchored at the wrist), a mode is selected from posture and
depth dominance, and a continuous command is emitted from the frame-to-frame
displacement of the mode's tracking point. All functions here are pure:
``step`` consumes the previous state and returns the next one, so identical
frame sequences under identical config produce identical command sequences.

Mode rules:

* SHIFT  — index finger extended, its relative depth above the threshold and
           dominant over the middle finger by the delta margin.
* ROTATE — the mirror image with the middle finger dominant.
* ZOOM   — thumb-index pinch closed below the engage distance while ring,
           little and middle fingers are not extended. Extending the middle
           finger deactivates ZOOM on that exact frame, bypassing hysteresis.

A single sensitivity knob scales the whole system: thresholds divide by it,
gains multiply by it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

from .errors import ConfigInvalid
from .landmarks import FINGERS, PIP, TIP, WRIST, LandmarkFrame, PixelPoint, to_pixels


class Mode(str, Enum):
    NONE = "NONE"
    SHIFT = "SHIFT"
    ROTATE = "ROTATE"
    ZOOM = "ZOOM"


# Modes with a tracked point and a command payload.
ACTIVE_MODES = (Mode.SHIFT, Mode.ROTATE, Mode.ZOOM)

# Which fingertip each mode tracks (ZOOM tracks the pinch, anchored at the
# index tip for logging purposes).
TRACKING_FINGER = {Mode.SHIFT: "index", Mode.ROTATE: "middle", Mode.ZOOM: "index", Mode.NONE: "index"}


@dataclass(frozen=True)
class FingerPose:
    """Extension flag and wrist-relative depth per finger.

    ``rel_depth[f] = z_wrist - z_tip_f``: positive when the fingertip is
    closer to the camera than the wrist, which makes the quantity invariant
    to whole-hand distance changes.
    """

    extended: Mapping[str, bool]
    rel_depth: Mapping[str, float]


@dataclass(frozen=True)
class ModeConfig:
    """Every tunable of the state machine.

    Threshold fields are normalized quantities; gains are command units per
    diagonal-normalized displacement. ``sensitivity`` is the single exposed
    knob: effective thresholds are ``base / sensitivity`` and effective
    gains ``base * sensitivity``. The extension ratio and hysteresis count
    shape posture detection and are deliberately left out of that scaling.
    """

    depth_threshold: float = 0.04
    depth_delta_margin: float = 0.015
    extension_ratio: float = 1.3
    pinch_engage: float = 0.06
    dead_zone: float = 0.0015
    shift_gain: float = 1.0
    rotate_gain: float = 1.0
    zoom_gain: float = 1.0
    sensitivity: float = 1.0
    hysteresis_frames: int = 2
    # Tracker z convention: +1 when more-negative z means closer to the
    # camera (the usual case), -1 for trackers with the opposite sign.
    depth_sign: int = 1

    def __post_init__(self):
        for name in ("depth_threshold", "depth_delta_margin", "extension_ratio",
                     "pinch_engage", "dead_zone", "shift_gain", "rotate_gain",
                     "zoom_gain", "sensitivity"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigInvalid(f"{name} must be a finite positive number, got {v!r}")
        if not isinstance(self.hysteresis_frames, int) or self.hysteresis_frames < 0:
            raise ConfigInvalid(f"hysteresis_frames must be an integer >= 0, got {self.hysteresis_frames!r}")
        if self.depth_sign not in (1, -1):
            raise ConfigInvalid(f"depth_sign must be +1 or -1, got {self.depth_sign!r}")


@dataclass(frozen=True)
class EffectiveConfig:
    """ModeConfig with the sensitivity knob already applied."""

    depth_threshold: float
    depth_delta_margin: float
    extension_ratio: float
    pinch_engage: float
    dead_zone: float
    shift_gain: float
    rotate_gain: float
    zoom_gain: float
    hysteresis_frames: int
    depth_sign: int


def effective(cfg: ModeConfig) -> EffectiveConfig:
    """Resolve thresholds and gains under the global sensitivity.

    thresholds' = thresholds / s, gains' = gains * s. With s = 1 this is the
    identity.
    """
    s = cfg.sensitivity
    if not (isinstance(s, (int, float)) and math.isfinite(s) and s > 0):
        raise ConfigInvalid(f"sensitivity must be > 0, got {s!r}")
    return EffectiveConfig(
        depth_threshold=cfg.depth_threshold / s,
        depth_delta_margin=cfg.depth_delta_margin / s,
        extension_ratio=cfg.extension_ratio,
        pinch_engage=cfg.pinch_engage / s,
        dead_zone=cfg.dead_zone / s,
        shift_gain=cfg.shift_gain * s,
        rotate_gain=cfg.rotate_gain * s,
        zoom_gain=cfg.zoom_gain * s,
        hysteresis_frames=cfg.hysteresis_frames,
        depth_sign=cfg.depth_sign,
    )


@dataclass(frozen=True)
class GestureState:
    """The state machine's memory between frames.

    ``prev_tip`` / ``prev_pinch`` are defined only while the corresponding
    mode is active; the first frame of a newly activated mode has no t-1
    reference and therefore emits no command.
    """

    mode: Mode = Mode.NONE
    prev_tip: PixelPoint | None = None
    prev_pinch: float | None = None
    candidate_mode: Mode | None = None
    candidate_count: int = 0


INITIAL_STATE = GestureState()


@dataclass(frozen=True)
class Command:
    """One navigation action. NONE carries zero payload (an empty action)."""

    kind: Mode = Mode.NONE
    dx: float = 0.0
    dy: float = 0.0
    dzoom: float = 0.0


EMPTY_COMMAND = Command()


def finger_pose(frame: LandmarkFrame, cfg: ModeConfig | EffectiveConfig = ModeConfig()) -> FingerPose:
    """Classify finger extension and compute wrist-relative depths.

    A finger is extended iff its tip sits at least ``extension_ratio`` times
    as far from the wrist as its pip joint, measured in normalized image
    coordinates. The ratio test is scale- and resolution-invariant.
    """
    lms = frame.landmarks
    wrist = lms[WRIST]
    extended: dict[str, bool] = {}
    rel_depth: dict[str, float] = {}
    for f in FINGERS:
        tip = lms[TIP[f]]
        pip = lms[PIP[f]]
        tip_d = math.hypot(tip.x - wrist.x, tip.y - wrist.y)
        pip_d = math.hypot(pip.x - wrist.x, pip.y - wrist.y)
        extended[f] = tip_d >= cfg.extension_ratio * pip_d
        rel_depth[f] = (wrist.z - tip.z) * cfg.depth_sign
    return FingerPose(extended=extended, rel_depth=rel_depth)


def pinch_distance(frame: LandmarkFrame) -> float:
    """Euclidean image-space distance between index and thumb tips, pixels."""
    index = to_pixels(frame.landmarks[TIP["index"]], frame.width, frame.height)
    thumb = to_pixels(frame.landmarks[TIP["thumb"]], frame.width, frame.height)
    return math.hypot(index.x_p - thumb.x_p, index.y_p - thumb.y_p)


def raw_mode(pose: FingerPose, pinch_px: float, diag: float, eff: EffectiveConfig) -> Mode:
    """Evaluate the mode predicates on one frame, before hysteresis.

    Priority when predicates overlap is ZOOM > SHIFT > ROTATE: the pinch is
    the most deliberate gesture. SHIFT and ROTATE are mutually exclusive by
    construction whenever the delta margin is positive, since each requires
    depth dominance over the other.
    """
    if (pinch_px / diag <= eff.pinch_engage
            and not pose.extended["ring"]
            and not pose.extended["little"]
            and not pose.extended["middle"]):
        return Mode.ZOOM
    d_index = pose.rel_depth["index"]
    d_middle = pose.rel_depth["middle"]
    if (pose.extended["index"]
            and d_index > eff.depth_threshold
            and d_index > d_middle + eff.depth_delta_margin):
        return Mode.SHIFT
    if (pose.extended["middle"]
            and d_middle > eff.depth_threshold
            and d_middle > d_index + eff.depth_delta_margin):
        return Mode.ROTATE
    return Mode.NONE


def _mode_transition(
    pose: FingerPose, pinch_px: float, diag: float, eff: EffectiveConfig, state: GestureState
) -> tuple[Mode, Mode | None, int]:
    """Apply hysteresis to the raw mode; returns (mode, candidate, count).

    The committed mode changes only after the same raw mode has been seen
    for ``hysteresis_frames`` consecutive frames, with one exception: an
    extended middle finger ends ZOOM on the spot.
    """
    raw = raw_mode(pose, pinch_px, diag, eff)
    if raw == state.mode:
        return state.mode, None, 0
    if raw == state.candidate_mode:
        count = state.candidate_count + 1
    else:
        count = 1
    if count >= max(1, eff.hysteresis_frames):
        return raw, None, 0
    if state.mode is Mode.ZOOM and pose.extended["middle"]:
        # Immediate deactivation: fall back to NONE now, and let the
        # candidate keep counting toward whatever comes next.
        return Mode.NONE, raw, count
    return state.mode, raw, count


def select_mode(
    pose: FingerPose, pinch_px: float, diag: float, cfg: ModeConfig, state: GestureState
) -> Mode:
    """The committed mode for this frame (hysteresis included)."""
    return _mode_transition(pose, pinch_px, diag, effective(cfg), state)[0]


def step(frame: LandmarkFrame, state: GestureState, cfg: ModeConfig) -> tuple[Command, GestureState]:
    """Advance the state machine by one frame.

    Returns the command for this frame and the successor state. A lost hand
    drops straight to NONE with cleared memory. Mode entry frames prime the
    t-1 memory and emit an empty action; while a mode persists, the tracked
    delta is diagonal-normalized, gated by the dead zone (below it the frame
    is an empty action), scaled by the effective gain and emitted. Positive
    dzoom is a widening pinch, i.e. zoom-out.
    """
    if not frame.hand_present:
        return EMPTY_COMMAND, INITIAL_STATE

    eff = effective(cfg)
    diag = frame.diagonal()
    pose = finger_pose(frame, eff)
    pinch_px = pinch_distance(frame)
    mode, candidate, count = _mode_transition(pose, pinch_px, diag, eff, state)

    tip_px = to_pixels(frame.landmarks[TIP[TRACKING_FINGER[mode]]], frame.width, frame.height)

    if mode != state.mode:
        # Entry frame: no valid t-1, prime the memory instead of emitting.
        new_state = GestureState(
            mode=mode,
            prev_tip=tip_px if mode in (Mode.SHIFT, Mode.ROTATE) else None,
            prev_pinch=pinch_px if mode is Mode.ZOOM else None,
            candidate_mode=candidate,
            candidate_count=count,
        )
        return EMPTY_COMMAND, new_state

    if mode is Mode.NONE:
        return EMPTY_COMMAND, GestureState(mode=Mode.NONE, candidate_mode=candidate,
                                           candidate_count=count)

    if mode is Mode.ZOOM:
        delta = pinch_px - (state.prev_pinch if state.prev_pinch is not None else pinch_px)
        dnorm = delta / diag
        new_state = GestureState(mode=mode, prev_pinch=pinch_px,
                                 candidate_mode=candidate, candidate_count=count)
        if abs(dnorm) < eff.dead_zone:
            return EMPTY_COMMAND, new_state
        return Command(kind=Mode.ZOOM, dzoom=dnorm * eff.zoom_gain), new_state

    prev = state.prev_tip if state.prev_tip is not None else tip_px
    dx_norm = (tip_px.x_p - prev.x_p) / diag
    dy_norm = (tip_px.y_p - prev.y_p) / diag
    new_state = GestureState(mode=mode, prev_tip=tip_px,
                             candidate_mode=candidate, candidate_count=count)
    if math.hypot(dx_norm, dy_norm) < eff.dead_zone:
        return EMPTY_COMMAND, new_state
    gain = eff.shift_gain if mode is Mode.SHIFT else eff.rotate_gain
    return Command(kind=mode, dx=dx_norm * gain, dy=dy_norm * gain), new_state


class GestureEngine:
    """Stateful convenience wrapper around ``step`` for runtime loops.

    Strictly single-consumer: one ``process`` call at a time, frames in
    arrival order.
    """

    def __init__(self, cfg: ModeConfig | None = None):
        self.cfg = cfg or ModeConfig()
        self.state = INITIAL_STATE

    def process(self, frame: LandmarkFrame) -> Command:
        command, self.state = step(frame, self.state, self.cfg)
        return command

    def reset(self) -> None:
        self.state = INITIAL_STATE
