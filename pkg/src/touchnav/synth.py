"""Synthetic landmark-trace generation from gesture scripts.

A script is a tiny line format: optional header directives followed by one
segment per line. Example::

    fps 30
    size 1280 720
    seed 11
    noise 0.0002

    idle 120
    shift-line 260 cx=0.28 cy=0.40 dx=0.0024 dy=0.0005 hold=40
    rotate-arc 320 cx=0.55 cy=0.45 radius=0.13 omega=0.012 hold=48
    pinch-ramp 70 from=200 to=45
    idle 60

Segments:

* ``idle N``        — static hand, no predicate fires.
* ``shift-line N``  — index-dominant pose translating by (dx, dy) per frame.
* ``rotate-arc N``  — middle-dominant pose tracing a circular arc
                      (``radius`` and ``omega`` in normalized units / rad
                      per frame).
* ``pinch-ramp N``  — pinch pose with the thumb-index distance ramped
                      linearly ``from``->``to`` pixels.

``hold=K`` freezes the hand on K evenly spread frames of the segment
(the tracker repeats the previous landmarks verbatim), which is how traces
with a controlled share of empty actions are built. ``noise=A`` adds
uniform +-A jitter to every coordinate. ``cx``/``cy`` teleport the hand
center at the segment start; by default each segment continues from where
the previous one left the hand.

Every generated frame is checked against the engine's own mode predicates:
a script whose geometry does not actually produce the intended mode fails
generation instead of producing a misleading trace.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterator

from .engine import EffectiveConfig, Mode, ModeConfig, effective, finger_pose, pinch_distance, raw_mode
from .errors import SpecInvalid
from .landmarks import Landmark, LandmarkFrame, validate_frame
from .trace import write_trace

# Finger layout of the synthetic hand, in normalized units relative to the
# wrist. Directions point from the wrist toward the fingertip; the thumb is
# deliberately lateral so a curled hand does not read as a pinch.
_DIRECTIONS = {
    "thumb": (-0.95, -0.31),
    "index": (-0.25, -0.97),
    "middle": (0.0, -1.0),
    "ring": (0.25, -0.97),
    "little": (0.45, -0.90),
}
_WRIST_OFFSET = (0.0, 0.18)
_PIP_LEN = 0.10
_TIP_EXTENDED = 0.21
_TIP_CURLED = 0.105
# Wrist-relative tip depths: dominant fingers sit well above the default
# detection threshold, everything else well below it.
_Z_DOMINANT = -0.09
_Z_NEUTRAL = -0.01

_SEGMENT_KINDS = ("idle", "shift-line", "rotate-arc", "pinch-ramp")


@dataclass
class Segment:
    kind: str
    frames: int
    params: dict[str, float] = field(default_factory=dict)


@dataclass
class SynthSpec:
    fps: int = 30
    width: int = 1280
    height: int = 720
    seed: int = 0
    noise: float = 0.0
    segments: list[Segment] = field(default_factory=list)


_SEGMENT_PARAMS = {
    "idle": {"cx", "cy", "noise"},
    "shift-line": {"cx", "cy", "dx", "dy", "hold", "noise"},
    "rotate-arc": {"cx", "cy", "radius", "omega", "hold", "noise"},
    "pinch-ramp": {"cx", "cy", "from", "to", "hold", "noise"},
}


def parse_script(text: str) -> SynthSpec:
    """Parse a gesture script. Raises SpecInvalid on anything off-contract."""
    spec = SynthSpec()
    in_segments = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0]
        try:
            if head in ("fps", "seed") and len(parts) == 2:
                if in_segments:
                    raise SpecInvalid(f"line {line_no}: {head} must precede segments")
                setattr(spec, head, int(parts[1]))
                continue
            if head == "noise" and len(parts) == 2 and not in_segments:
                spec.noise = float(parts[1])
                continue
            if head == "size" and len(parts) == 3:
                if in_segments:
                    raise SpecInvalid(f"line {line_no}: size must precede segments")
                spec.width, spec.height = int(parts[1]), int(parts[2])
                continue
        except ValueError:
            raise SpecInvalid(f"line {line_no}: bad {head} directive {line!r}") from None
        if head not in _SEGMENT_KINDS:
            raise SpecInvalid(f"line {line_no}: unknown segment kind {head!r}")
        if len(parts) < 2:
            raise SpecInvalid(f"line {line_no}: segment needs a frame count")
        try:
            frames = int(parts[1])
        except ValueError:
            raise SpecInvalid(f"line {line_no}: bad frame count {parts[1]!r}") from None
        if frames < 1:
            raise SpecInvalid(f"line {line_no}: frame count must be >= 1")
        params: dict[str, float] = {}
        for tok in parts[2:]:
            if "=" not in tok:
                raise SpecInvalid(f"line {line_no}: expected key=value, got {tok!r}")
            key, _, val = tok.partition("=")
            if key not in _SEGMENT_PARAMS[head]:
                raise SpecInvalid(f"line {line_no}: {head} does not take {key!r}")
            try:
                params[key] = float(val)
            except ValueError:
                raise SpecInvalid(f"line {line_no}: bad value for {key!r}: {val!r}") from None
        hold = int(params.get("hold", 0))
        if hold < 0 or hold > max(0, frames - 2):
            raise SpecInvalid(f"line {line_no}: hold must be in [0, frames-2]")
        in_segments = True
        spec.segments.append(Segment(kind=head, frames=frames, params=params))
    if spec.fps < 1 or spec.width < 1 or spec.height < 1:
        raise SpecInvalid("fps and size must be positive")
    if spec.noise < 0:
        raise SpecInvalid("noise amplitude must be >= 0")
    if not spec.segments:
        raise SpecInvalid("script has no segments")
    return spec


def _interp(a: tuple[float, float], b: tuple[float, float], t: float) -> tuple[float, float]:
    return (a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t)


def _finger_chain(wrist: tuple[float, float], direction: tuple[float, float],
                  tip_len: float, z_tip: float) -> dict[int, Landmark]:
    """Joint positions for one finger along a straight ray from the wrist."""
    ux, uy = direction
    norm = math.hypot(ux, uy)
    ux, uy = ux / norm, uy / norm
    tip = (wrist[0] + ux * tip_len, wrist[1] + uy * tip_len)
    pip = (wrist[0] + ux * _PIP_LEN, wrist[1] + uy * _PIP_LEN)
    base = (wrist[0] + ux * 0.06, wrist[1] + uy * 0.06)
    dip = _interp(pip, tip, 0.5)
    return {
        0: Landmark(base[0], base[1], _Z_NEUTRAL),
        1: Landmark(pip[0], pip[1], _Z_NEUTRAL),
        2: Landmark(dip[0], dip[1], _Z_NEUTRAL),
        3: Landmark(tip[0], tip[1], z_tip),
    }


def _hand(kind: str, cx: float, cy: float, pinch_px: float | None,
          width: int) -> list[Landmark]:
    """A 21-point hand at center (cx, cy) posed for the given segment kind."""
    wrist = (cx + _WRIST_OFFSET[0], cy + _WRIST_OFFSET[1])
    lms: list[Landmark | None] = [None] * 21
    lms[0] = Landmark(wrist[0], wrist[1], 0.0)

    if kind == "shift-line":
        spec = {"thumb": (_TIP_CURLED, _Z_NEUTRAL), "index": (_TIP_EXTENDED, _Z_DOMINANT),
                "middle": (_TIP_CURLED, _Z_NEUTRAL), "ring": (_TIP_CURLED, _Z_NEUTRAL),
                "little": (_TIP_CURLED, _Z_NEUTRAL)}
    elif kind == "rotate-arc":
        spec = {"thumb": (_TIP_CURLED, _Z_NEUTRAL), "index": (_TIP_CURLED, _Z_NEUTRAL),
                "middle": (_TIP_EXTENDED, _Z_DOMINANT), "ring": (_TIP_CURLED, _Z_NEUTRAL),
                "little": (_TIP_CURLED, _Z_NEUTRAL)}
    else:  # idle and the pinch skeleton share the all-curled base
        spec = {f: (_TIP_CURLED, _Z_NEUTRAL) for f in _DIRECTIONS}

    base_index = {"thumb": 1, "index": 5, "middle": 9, "ring": 13, "little": 17}
    for f, (tip_len, z_tip) in spec.items():
        chain = _finger_chain(wrist, _DIRECTIONS[f], tip_len, z_tip)
        for off, lm in chain.items():
            lms[base_index[f] + off] = lm

    if kind == "pinch-ramp":
        # Thumb and index tips meet at the pinch midpoint above the wrist.
        assert pinch_px is not None
        half = pinch_px / (2.0 * width)
        mid = (cx, cy - 0.02)
        index_tip = (mid[0] - half, mid[1])
        thumb_tip = (mid[0] + half, mid[1])
        for tip, tip_idx in ((index_tip, 8), (thumb_tip, 4)):
            root = wrist
            lms[tip_idx] = Landmark(tip[0], tip[1], _Z_NEUTRAL)
            for frac, j in ((0.25, tip_idx - 3), (0.5, tip_idx - 2), (0.75, tip_idx - 1)):
                p = _interp(root, tip, frac)
                lms[j] = Landmark(p[0], p[1], _Z_NEUTRAL)

    return [lm for lm in lms if lm is not None]


_EXPECTED_MODE = {"idle": Mode.NONE, "shift-line": Mode.SHIFT, "rotate-arc": Mode.ROTATE}


def _hold_indices(frames: int, hold: int) -> set[int]:
    """Spread ``hold`` freeze frames over indices 2..frames-1."""
    if hold <= 0:
        return set()
    return {2 + (j * (frames - 2)) // hold for j in range(hold)}


def generate_frames(spec: SynthSpec, cfg: ModeConfig | None = None) -> Iterator[LandmarkFrame]:
    """Yield the trace for a script, verifying predicates as it goes.

    Raises SpecInvalid if any generated frame fails validation or does not
    satisfy the mode predicates its segment promises under ``cfg``.
    """
    eff = effective(cfg or ModeConfig())
    rng = random.Random(spec.seed)
    diag = math.hypot(spec.width, spec.height)
    dt_us = 1_000_000 // spec.fps
    frame_id = 0
    center = (0.5, 0.45)
    prev_landmarks: tuple[Landmark, ...] | None = None

    for seg_no, seg in enumerate(spec.segments):
        p = seg.params
        center = (p.get("cx", center[0]), p.get("cy", center[1]))
        noise = p.get("noise", spec.noise)
        holds = _hold_indices(seg.frames, int(p.get("hold", 0)))
        theta = 0.0
        pivot = (center[0] - p.get("radius", 0.0), center[1])
        pinch = p.get("from", 0.0)
        moves = seg.frames - len(holds)
        pinch_step = 0.0
        if seg.kind == "pinch-ramp":
            if "from" not in p or "to" not in p:
                raise SpecInvalid(f"segment {seg_no}: pinch-ramp needs from= and to=")
            pinch_step = (p["to"] - p["from"]) / max(1, moves - 1)

        for i in range(seg.frames):
            if i in holds:
                landmarks = prev_landmarks
            else:
                if i > 0:  # frame 0 sits at the segment start position
                    if seg.kind == "shift-line":
                        center = (center[0] + p.get("dx", 0.0), center[1] + p.get("dy", 0.0))
                    elif seg.kind == "rotate-arc":
                        theta += p.get("omega", 0.0)
                        r = p.get("radius", 0.0)
                        center = (pivot[0] + r * math.cos(theta), pivot[1] + r * math.sin(theta))
                    elif seg.kind == "pinch-ramp":
                        pinch += pinch_step
                pts = _hand(seg.kind, center[0], center[1],
                            pinch if seg.kind == "pinch-ramp" else None, spec.width)
                if any(not (0.0 <= lm.x <= 1.0 and 0.0 <= lm.y <= 1.0) for lm in pts):
                    raise SpecInvalid(
                        f"segment {seg_no} ({seg.kind}) frame {i}: path leaves the image"
                    )
                if noise > 0:
                    pts = [Landmark(
                        min(1.0, max(0.0, lm.x + rng.uniform(-noise, noise))),
                        min(1.0, max(0.0, lm.y + rng.uniform(-noise, noise))),
                        lm.z + rng.uniform(-noise, noise),
                    ) for lm in pts]
                landmarks = tuple(pts)

            frame = LandmarkFrame(
                frame_id=frame_id,
                t_capture_us=frame_id * dt_us,
                width=spec.width,
                height=spec.height,
                hand_present=True,
                landmarks=landmarks,
            )

            pose = finger_pose(frame, eff)
            pinch_px = pinch_distance(frame)
            raw = raw_mode(pose, pinch_px, diag, eff)
            if seg.kind == "pinch-ramp":
                expect = Mode.ZOOM if pinch_px / diag <= eff.pinch_engage else Mode.NONE
            else:
                expect = _EXPECTED_MODE[seg.kind]
            if raw != expect:
                raise SpecInvalid(
                    f"segment {seg_no} ({seg.kind}) frame {i}: predicates select "
                    f"{raw.value}, intended {expect.value} (noise too large?)"
                )

            prev_landmarks = landmarks
            frame_id += 1
            yield frame


def generate_trace(path, script_text: str, cfg: ModeConfig | None = None,
                   overrides: dict | None = None) -> int:
    """Parse, generate and write a trace file. Returns the frame count."""
    spec = parse_script(script_text)
    for key, val in (overrides or {}).items():
        if val is not None:
            setattr(spec, key, val)
    return write_trace(path, generate_frames(spec, cfg))


# Bundled reference script: 3000 frames touching every mode, with enough
# held frames and coordinate noise to look like a real tracker. Arc and
# ramp speeds are chosen so ordinary motion clears the default dead zone
# even at the vertical tangent, where the diagonal normalization is least
# forgiving.
GOLDEN_SCRIPT = """\
fps 30
size 1280 720
seed 11
noise 0.0002

idle 120
shift-line 260 cx=0.28 cy=0.40 dx=0.0024 dy=0.0005 hold=40
shift-line 260 dx=-0.0024 dy=-0.0005 hold=40
idle 60
rotate-arc 320 cx=0.55 cy=0.45 radius=0.13 omega=0.028 hold=48
idle 60
pinch-ramp 70 from=260 to=45 hold=6
pinch-ramp 70 from=45 to=260 hold=6
idle 60
shift-line 260 cx=0.30 cy=0.55 dx=0.0023 dy=-0.0007 hold=36
rotate-arc 300 cx=0.60 cy=0.42 radius=0.12 omega=-0.03 hold=40
idle 60
pinch-ramp 80 from=300 to=50 hold=8
pinch-ramp 80 from=50 to=300 hold=8
shift-line 300 cx=0.32 cy=0.46 dx=0.0022 dy=0.0004 hold=45
rotate-arc 300 cx=0.58 cy=0.48 radius=0.12 omega=0.028 hold=42
idle 100
pinch-ramp 80 from=280 to=55 hold=8
pinch-ramp 80 from=55 to=280 hold=8
idle 80
"""
