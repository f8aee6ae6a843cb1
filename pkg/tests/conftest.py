"""Shared fixtures: hand-constructed landmark frames for predicate tests.

The helpers here build frames from explicit geometry (positions stated in
the tests), independent of the package's own synthetic-trace generator, so
engine tests never validate the engine against itself.
"""

from __future__ import annotations

import math

from touchnav.landmarks import PIP, TIP, Landmark, LandmarkFrame


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        print(f"\n[acceptance] {name}: {'PASS' if report.passed else 'FAIL'}")

# Fixture hand layout: fingers fan out upward from the wrist, thumb lateral
# enough that a fully curled hand does not read as a pinch.
_DIRS = {
    "thumb": (-0.95, -0.2),
    "index": (-0.3, -0.95),
    "middle": (0.0, -1.0),
    "ring": (0.3, -0.95),
    "little": (0.5, -0.85),
}
_PIP_LEN = 0.10
_EXTENDED_LEN = 0.21
_CURLED_LEN = 0.105


def make_hand(
    wrist: tuple[float, float] = (0.5, 0.72),
    extended: tuple[str, ...] = (),
    rel_depth: dict[str, float] | None = None,
    index_tip: tuple[float, float] | None = None,
    thumb_tip: tuple[float, float] | None = None,
    middle_tip: tuple[float, float] | None = None,
) -> tuple[Landmark, ...]:
    """21 landmarks: wrist at z=0, tips curled unless listed in ``extended``.

    ``rel_depth`` sets z_wrist - z_tip per finger (default 0.01).
    Absolute tip overrides position specific tips for pinch geometry.
    """
    rel_depth = rel_depth or {}
    lms = [Landmark(wrist[0], wrist[1], 0.0)] * 21
    overrides = {"index": index_tip, "thumb": thumb_tip, "middle": middle_tip}
    for f, (ux, uy) in _DIRS.items():
        n = math.hypot(ux, uy)
        ux, uy = ux / n, uy / n
        tip_len = _EXTENDED_LEN if f in extended else _CURLED_LEN
        pip = (wrist[0] + ux * _PIP_LEN, wrist[1] + uy * _PIP_LEN)
        tip = (wrist[0] + ux * tip_len, wrist[1] + uy * tip_len)
        if overrides.get(f) is not None:
            tip = overrides[f]
        z_tip = -rel_depth.get(f, 0.01)
        lms[PIP[f]] = Landmark(pip[0], pip[1], -0.005)
        lms[TIP[f]] = Landmark(tip[0], tip[1], z_tip)
    return tuple(lms)


def make_frame(
    frame_id: int = 0,
    t_us: int = 0,
    width: int = 1280,
    height: int = 720,
    hand: bool = True,
    landmarks: tuple[Landmark, ...] | None = None,
    **hand_kwargs,
) -> LandmarkFrame:
    if hand and landmarks is None:
        landmarks = make_hand(**hand_kwargs)
    return LandmarkFrame(
        frame_id=frame_id,
        t_capture_us=t_us,
        width=width,
        height=height,
        hand_present=hand,
        landmarks=landmarks if hand else (),
    )


def shift_pose_kwargs(index_xy: tuple[float, float]) -> dict:
    """A pose satisfying the SHIFT predicate with the index tip at index_xy."""
    return dict(extended=("index",), rel_depth={"index": 0.08, "middle": 0.01},
                index_tip=index_xy)


def rotate_pose_kwargs(middle_xy: tuple[float, float] | None = None) -> dict:
    kw = dict(extended=("middle",), rel_depth={"middle": 0.08, "index": 0.01})
    if middle_xy is not None:
        kw["middle_tip"] = middle_xy
    return kw


def pinch_pose_kwargs(pinch_px: float, width: int = 1280,
                      center: tuple[float, float] = (0.5, 0.5),
                      middle_extended: bool = False) -> dict:
    """A pose whose thumb-index pixel distance is exactly ``pinch_px``."""
    half = pinch_px / (2 * width)
    kw = dict(
        index_tip=(center[0] - half, center[1]),
        thumb_tip=(center[0] + half, center[1]),
    )
    if middle_extended:
        kw["extended"] = ("middle",)
    return kw
