import math
import random

import pytest

from touchnav.engine import (
    EMPTY_COMMAND,
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
from touchnav.errors import ConfigInvalid
from touchnav.landmarks import to_pixels

from conftest import make_frame, pinch_pose_kwargs, rotate_pose_kwargs, shift_pose_kwargs

DIAG = math.hypot(1280, 720)


def run(frames, cfg):
    """Drive the engine over frames; returns (commands, modes)."""
    eng = GestureEngine(cfg)
    commands, modes = [], []
    for f in frames:
        commands.append(eng.process(f))
        modes.append(eng.state.mode)
    return commands, modes


# -- finger pose --------------------------------------------------------------


def test_straight_finger_is_extended():
    # tip at twice the pip's distance from the wrist: ratio 2.0 >= 1.3
    pose = finger_pose(make_frame(extended=("index",)))
    assert pose.extended["index"] is True


def test_curled_finger_not_extended():
    pose = finger_pose(make_frame())
    assert pose.extended["index"] is False


def test_rel_depth_sign():
    # z_wrist = 0, z_index_tip = -0.05 -> rel depth +0.05 (tip closer)
    pose = finger_pose(make_frame(rel_depth={"index": 0.05}))
    assert pose.rel_depth["index"] == pytest.approx(0.05)


def test_depth_sign_flip_for_opposite_trackers():
    frame = make_frame(rel_depth={"index": 0.05})
    flipped = finger_pose(frame, ModeConfig(depth_sign=-1))
    assert flipped.rel_depth["index"] == pytest.approx(-0.05)
    with pytest.raises(ConfigInvalid):
        ModeConfig(depth_sign=0)


# -- mode predicates ----------------------------------------------------------


def _pose_and_pinch(frame, cfg=ModeConfig()):
    return finger_pose(frame, cfg), pinch_distance(frame)


def test_shift_predicate_fixture():
    frame = make_frame(**shift_pose_kwargs((0.5, 0.5)))
    pose, pinch = _pose_and_pinch(frame)
    eff = effective(ModeConfig())
    # evaluate each predicate independently of the engine
    assert pose.extended["index"]
    assert pose.rel_depth["index"] == pytest.approx(0.08)
    assert pose.rel_depth["index"] > eff.depth_threshold
    assert pose.rel_depth["index"] > pose.rel_depth["middle"] + eff.depth_delta_margin
    assert pinch / DIAG > eff.pinch_engage
    assert raw_mode(pose, pinch, DIAG, eff) is Mode.SHIFT


def test_rotate_predicate_fixture():
    frame = make_frame(**rotate_pose_kwargs())
    pose, pinch = _pose_and_pinch(frame)
    assert raw_mode(pose, pinch, DIAG, effective(ModeConfig())) is Mode.ROTATE


def test_zoom_predicate_and_middle_veto():
    closed = make_frame(**pinch_pose_kwargs(40.0))
    pose, pinch = _pose_and_pinch(closed)
    eff = effective(ModeConfig())
    assert pinch == pytest.approx(40.0)
    assert raw_mode(pose, pinch, DIAG, eff) is Mode.ZOOM

    vetoed = make_frame(**pinch_pose_kwargs(40.0, middle_extended=True))
    pose, pinch = _pose_and_pinch(vetoed)
    assert raw_mode(pose, pinch, DIAG, eff) is not Mode.ZOOM


def test_all_curled_is_none():
    pose, pinch = _pose_and_pinch(make_frame())
    assert raw_mode(pose, pinch, DIAG, effective(ModeConfig())) is Mode.NONE


def test_shift_rotate_mutually_exclusive_construction():
    # each requires dominance over the other by the margin; both cannot hold
    cfg = effective(ModeConfig())
    rel_i, rel_m = 0.08, 0.08
    shift_ok = rel_i > rel_m + cfg.depth_delta_margin
    rotate_ok = rel_m > rel_i + cfg.depth_delta_margin
    assert not (shift_ok and rotate_ok)


def test_select_mode_applies_hysteresis():
    frame = make_frame(**shift_pose_kwargs((0.5, 0.5)))
    pose, pinch = _pose_and_pinch(frame)
    cfg = ModeConfig(hysteresis_frames=2)
    state = GestureState()
    assert select_mode(pose, pinch, DIAG, cfg, state) is Mode.NONE  # 1st observation
    state = GestureState(candidate_mode=Mode.SHIFT, candidate_count=1)
    assert select_mode(pose, pinch, DIAG, cfg, state) is Mode.SHIFT  # 2nd commits


# -- step / command generation -------------------------------------------------


def test_shift_delta_command():
    cfg = ModeConfig(hysteresis_frames=1)
    # index tip moves (640,360) -> (650,360) at 1280x720
    frames = [
        make_frame(frame_id=0, **shift_pose_kwargs((0.5, 0.5))),
        make_frame(frame_id=1, **shift_pose_kwargs((650 / 1280, 0.5))),
    ]
    commands, modes = run(frames, cfg)
    assert commands[0] == EMPTY_COMMAND  # entry frame primes memory
    assert modes[0] is Mode.SHIFT
    expected = 10.0 / math.hypot(1280, 720)  # independent scalar computation
    assert commands[1].kind is Mode.SHIFT
    assert abs(commands[1].dx - expected) < 1e-9
    assert commands[1].dy == 0.0


def test_pinch_distance_345_exact():
    # power-of-two dimensions keep pixel positions exact: (103,104) vs (100,100)
    frame = make_frame(width=1024, height=512,
                       index_tip=(103 / 1024, 104 / 512),
                       thumb_tip=(100 / 1024, 100 / 512))
    assert pinch_distance(frame) == 5.0


def test_zoom_zero_delta_is_empty_action():
    cfg = ModeConfig(hysteresis_frames=1)
    frames = [make_frame(frame_id=i, **pinch_pose_kwargs(80.0)) for i in range(3)]
    commands, modes = run(frames, cfg)
    assert modes == [Mode.ZOOM] * 3
    assert commands == [EMPTY_COMMAND] * 3  # entry, then zero deltas


def test_zoom_sign_convention():
    cfg = ModeConfig(hysteresis_frames=1)
    closing = [make_frame(frame_id=i, **pinch_pose_kwargs(80.0 - 10 * i)) for i in range(4)]
    commands, _ = run(closing, cfg)
    emitted = [c for c in commands if c.kind is Mode.ZOOM]
    assert emitted and all(c.dzoom < 0 for c in emitted)  # closing = zoom-in

    opening = [make_frame(frame_id=i, **pinch_pose_kwargs(40.0 + 10 * i)) for i in range(4)]
    commands, _ = run(opening, cfg)
    emitted = [c for c in commands if c.kind is Mode.ZOOM]
    assert emitted and all(c.dzoom > 0 for c in emitted)  # opening = zoom-out


def test_immediate_zoom_abort_on_middle_extension():
    cfg = ModeConfig(hysteresis_frames=5)  # large, to prove the bypass
    frames = [make_frame(frame_id=i, **pinch_pose_kwargs(60.0)) for i in range(6)]
    frames.append(make_frame(frame_id=6, **pinch_pose_kwargs(60.0, middle_extended=True)))
    commands, modes = run(frames, cfg)
    assert modes[5] is Mode.ZOOM
    assert modes[6] is Mode.NONE  # same frame, hysteresis bypassed
    assert commands[6] == EMPTY_COMMAND


def test_mode_exit_respects_hysteresis_without_veto():
    cfg = ModeConfig(hysteresis_frames=3)
    frames = [make_frame(frame_id=i, **pinch_pose_kwargs(60.0)) for i in range(4)]
    # pinch opens far beyond engage, but no middle extension: 3-frame wait
    frames += [make_frame(frame_id=4 + i, **pinch_pose_kwargs(400.0)) for i in range(3)]
    _, modes = run(frames, cfg)
    assert modes[4] is Mode.ZOOM
    assert modes[5] is Mode.ZOOM
    assert modes[6] is Mode.NONE


def test_hand_lost_resets_to_none():
    cfg = ModeConfig(hysteresis_frames=1)
    frames = [
        make_frame(frame_id=0, **shift_pose_kwargs((0.5, 0.5))),
        make_frame(frame_id=1, hand=False),
    ]
    commands, modes = run(frames, cfg)
    assert modes[1] is Mode.NONE
    assert commands[1] == EMPTY_COMMAND


def test_first_frame_after_switch_is_silent():
    cfg = ModeConfig(hysteresis_frames=1)
    frames = [
        make_frame(frame_id=0, **shift_pose_kwargs((0.5, 0.5))),
        make_frame(frame_id=1, **shift_pose_kwargs((0.52, 0.5))),
        make_frame(frame_id=2, **rotate_pose_kwargs()),
        make_frame(frame_id=3, **rotate_pose_kwargs()),
    ]
    commands, modes = run(frames, cfg)
    assert modes[2] is Mode.ROTATE
    assert commands[2] == EMPTY_COMMAND  # entry frame of ROTATE


def test_static_hand_emits_only_empty_actions():
    cfg = ModeConfig(hysteresis_frames=1)
    frames = [make_frame(frame_id=i, **shift_pose_kwargs((0.5, 0.5))) for i in range(10)]
    commands, modes = run(frames, cfg)
    assert all(m is Mode.SHIFT for m in modes)
    assert all(c == EMPTY_COMMAND for c in commands)


def test_gain_linearity():
    base = ModeConfig(hysteresis_frames=1, shift_gain=1.0)
    scaled = ModeConfig(hysteresis_frames=1, shift_gain=3.0)
    frames = [make_frame(frame_id=i, **shift_pose_kwargs((0.4 + 0.01 * i, 0.5)))
              for i in range(8)]
    ref, _ = run(frames, base)
    out, _ = run(frames, scaled)
    for a, b in zip(ref, out):
        assert b.kind is a.kind
        if a.kind is Mode.SHIFT:
            assert b.dx == 3.0 * a.dx
            assert b.dy == 3.0 * a.dy


def test_determinism():
    frames = [make_frame(frame_id=i, **shift_pose_kwargs((0.4 + 0.007 * i, 0.5)))
              for i in range(20)]
    cfg = ModeConfig()
    a = run(frames, cfg)
    b = run(frames, cfg)
    assert a == b


def test_resolution_independence():
    cfg = ModeConfig(hysteresis_frames=1)
    positions = [(0.4 + 0.004 * i, 0.5 + 0.002 * i) for i in range(15)]
    hd = [make_frame(frame_id=i, width=1280, height=720, **shift_pose_kwargs(p))
          for i, p in enumerate(positions)]
    fhd = [make_frame(frame_id=i, width=1920, height=1080, **shift_pose_kwargs(p))
           for i, p in enumerate(positions)]
    cmd_hd, modes_hd = run(hd, cfg)
    cmd_fhd, modes_fhd = run(fhd, cfg)
    assert modes_hd == modes_fhd
    for a, b in zip(cmd_hd, cmd_fhd):
        assert a.kind is b.kind
        assert abs(a.dx - b.dx) < 1e-9
        assert abs(a.dy - b.dy) < 1e-9


# -- sensitivity --------------------------------------------------------------


def test_effective_identity_at_unit_sensitivity():
    cfg = ModeConfig(sensitivity=1.0)
    eff = effective(cfg)
    assert eff.depth_threshold == cfg.depth_threshold
    assert eff.shift_gain == cfg.shift_gain
    assert eff.dead_zone == cfg.dead_zone


def test_effective_scaling():
    eff = effective(ModeConfig(sensitivity=2.0))
    assert eff.depth_threshold == ModeConfig().depth_threshold / 2
    assert eff.pinch_engage == ModeConfig().pinch_engage / 2
    assert eff.shift_gain == ModeConfig().shift_gain * 2
    assert eff.zoom_gain == ModeConfig().zoom_gain * 2


def test_invalid_sensitivity_rejected():
    with pytest.raises(ConfigInvalid):
        ModeConfig(sensitivity=0.0)
    with pytest.raises(ConfigInvalid):
        ModeConfig(sensitivity=-1.0)


def test_sensitivity_doubling_replay_oracle():
    """With every margin strict by factor 2, doubling sensitivity keeps the
    mode sequence and doubles every emitted payload."""
    cfg1 = ModeConfig(hysteresis_frames=1, sensitivity=1.0)
    cfg2 = ModeConfig(hysteresis_frames=1, sensitivity=2.0)
    # deltas >= 2x dead zone: 0.004 normalized x = 0.0035 of the diagonal
    frames = [make_frame(frame_id=i, **shift_pose_kwargs((0.35 + 0.004 * i, 0.5)))
              for i in range(12)]
    frames += [make_frame(frame_id=12 + i, hand=True) for i in range(4)]  # curled idle
    cmd1, modes1 = run(frames, cfg1)
    cmd2, modes2 = run(frames, cfg2)
    assert modes1 == modes2
    for a, b in zip(cmd1, cmd2):
        assert a.kind is b.kind
        if a.kind is Mode.SHIFT:
            assert b.dx == pytest.approx(2 * a.dx, rel=1e-12)


# -- randomized mutual exclusion ----------------------------------------------


def test_mutual_exclusion_randomized():
    rng = random.Random(1234)
    from touchnav.engine import FingerPose

    for _ in range(2000):
        margin = rng.uniform(1e-6, 0.1)
        thr = rng.uniform(1e-6, 0.1)
        eff = effective(ModeConfig(depth_threshold=thr, depth_delta_margin=margin))
        pose = FingerPose(
            extended={f: rng.random() < 0.5 for f in ("thumb", "index", "middle", "ring", "little")},
            rel_depth={f: rng.uniform(-0.2, 0.2) for f in ("thumb", "index", "middle", "ring", "little")},
        )
        d_i, d_m = pose.rel_depth["index"], pose.rel_depth["middle"]
        shift_ok = pose.extended["index"] and d_i > thr and d_i > d_m + margin
        rotate_ok = pose.extended["middle"] and d_m > thr and d_m > d_i + margin
        assert not (shift_ok and rotate_ok)
        # engine agrees with the independently evaluated predicates
        mode = raw_mode(pose, pinch_px=500.0, diag=DIAG, eff=eff)
        assert mode is (Mode.SHIFT if shift_ok else Mode.ROTATE if rotate_ok else Mode.NONE)
