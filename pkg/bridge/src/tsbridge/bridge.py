"""The capture loop: tracker samples to ts-trace/1 wire frames.

The bridge performs no gesture logic at all; it packages whatever the
tracker reports so the engine stays the single source of truth and
recordings remain tracker-faithful. Frames go out over TCP and, when a
record path is configured, into a trace file. Recording happens at frame
production: if the network stalls and the bounded send buffer sheds old
frames (they are counted), the trace still holds the full gap-free capture.
"""

from __future__ import annotations

import collections
import json
import logging
import math
import socket
import threading
import time
from dataclasses import dataclass

from .trackers import Tracker

log = logging.getLogger("tsbridge")

TRACE_HEADER = "# ts-trace/1\n"


@dataclass
class BridgeConfig:
    engine_host: str = "127.0.0.1"
    engine_port: int = 7465
    camera_index: int = 0
    width: int = 1280
    height: int = 720
    fps: int = 30
    record_path: str | None = None
    duration_s: float = 0.0  # 0 = run until interrupted
    mock: bool = False
    min_detection_confidence: float = 0.5
    min_tracking_confidence: float = 0.5
    send_buffer: int = 64

    def __post_init__(self):
        if self.width < 1 or self.height < 1 or self.fps < 1:
            raise ValueError("resolution and fps must be positive")


def monotonic_us() -> int:
    return time.monotonic_ns() // 1000


def encode_frame(frame_id: int, t_capture_us: int, width: int, height: int,
                 landmarks: list[tuple[float, float, float]] | None) -> bytes:
    obj: dict = {
        "frame_id": frame_id,
        "t_capture_us": t_capture_us,
        "w": width,
        "h": height,
        "hand": landmarks is not None,
    }
    if landmarks is not None:
        obj["lm"] = [[x, y, z] for x, y, z in landmarks]
    return (json.dumps(obj, separators=(",", ":")) + "\n").encode("utf-8")


class EngineLink:
    """Non-blocking sender with a bounded buffer (oldest frame shed first).

    The capture loop must never stall on the network; shedding old frames
    is acceptable on the live path because the engine wants fresh ones.
    """

    def __init__(self, sock: socket.socket, maxlen: int):
        self.sock = sock
        self.dropped = 0
        self.sent = 0
        self._buf: collections.deque[bytes] = collections.deque()
        self._maxlen = maxlen
        self._cond = threading.Condition()
        self._closing = False
        self.dead = False
        self._thread = threading.Thread(target=self._run, name="bridge-send", daemon=True)
        self._thread.start()

    def offer(self, data: bytes) -> None:
        with self._cond:
            if self.dead:
                return
            if len(self._buf) >= self._maxlen:
                self._buf.popleft()
                self.dropped += 1
            self._buf.append(data)
            self._cond.notify()

    def _run(self) -> None:
        while True:
            with self._cond:
                while not self._buf and not self._closing:
                    self._cond.wait()
                if not self._buf and self._closing:
                    return
                data = self._buf.popleft()
            try:
                self.sock.sendall(data)
                self.sent += 1
            except OSError:
                with self._cond:
                    self.dead = True
                    self._buf.clear()
                return

    def close(self) -> None:
        with self._cond:
            self._closing = True
            self._cond.notify()
        self._thread.join(timeout=5.0)
        try:
            self.sock.close()
        except OSError:
            pass


def clock_handshake(sock: socket.socket, rounds: int = 10) -> int:
    """Midpoint offset estimate (engine clock minus ours), microseconds."""
    fh = sock.makefile("rwb")
    offsets = []
    for i in range(rounds):
        t0 = monotonic_us()
        fh.write((json.dumps({"echo": i, "t0_us": t0}) + "\n").encode())
        fh.flush()
        line = fh.readline()
        t1 = monotonic_us()
        if not line:
            raise OSError("engine closed during handshake")
        reply = json.loads(line)
        if reply.get("echo") != i:
            raise OSError("bad handshake reply")
        offsets.append(reply["t_engine_us"] - (t0 + t1) / 2)
    return round(sum(offsets) / len(offsets))


def make_tracker(cfg: BridgeConfig) -> Tracker:
    if cfg.mock:
        from .trackers import SyntheticTracker
        return SyntheticTracker()
    from .trackers import CameraTracker
    return CameraTracker(cfg.camera_index, cfg.min_detection_confidence,
                         cfg.min_tracking_confidence)


def run(cfg: BridgeConfig, stop: threading.Event | None = None) -> dict:
    """Stream (and/or record) frames until interrupted or the duration ends.

    Returns run statistics. If the engine is unreachable and a record path
    is configured, falls back to record-only with a warning; with neither a
    reachable engine nor a record path there is nothing to do.
    """
    stop = stop or threading.Event()
    link: EngineLink | None = None
    offset_us = 0
    try:
        sock = socket.create_connection((cfg.engine_host, cfg.engine_port), timeout=3.0)
        offset_us = clock_handshake(sock)
        sock.settimeout(None)
        link = EngineLink(sock, cfg.send_buffer)
        log.info("connected to engine %s:%d (clock offset %d us)",
                 cfg.engine_host, cfg.engine_port, offset_us)
    except OSError as e:
        if cfg.record_path is None:
            raise RuntimeError(
                f"engine {cfg.engine_host}:{cfg.engine_port} unreachable and no --record path: {e}"
            ) from e
        log.warning("engine unreachable (%s); falling back to record-only", e)

    record_fh = None
    if cfg.record_path is not None:
        record_fh = open(cfg.record_path, "wb")
        record_fh.write(TRACE_HEADER.encode())

    tracker = make_tracker(cfg)
    tracker.start(cfg.width, cfg.height)
    frame_id = 0
    frames_with_hand = 0
    period = 1.0 / cfg.fps
    t_start = time.monotonic()
    next_tick = t_start
    try:
        while not stop.is_set():
            now = time.monotonic()
            if cfg.duration_s and now - t_start >= cfg.duration_s:
                break
            if now < next_tick:
                time.sleep(next_tick - now)
            next_tick += period

            landmarks = tracker.read()
            t_capture = monotonic_us() + offset_us  # engine clock domain
            data = encode_frame(frame_id, t_capture, cfg.width, cfg.height, landmarks)
            if record_fh is not None:
                record_fh.write(data)
            if link is not None and not link.dead:
                link.offer(data)
            frame_id += 1
            if landmarks is not None:
                frames_with_hand += 1
    finally:
        tracker.stop()
        if record_fh is not None:
            record_fh.close()
        if link is not None:
            # give the sender a moment to drain before closing
            deadline = time.monotonic() + 2.0
            while time.monotonic() < deadline:
                with link._cond:
                    empty = not link._buf
                if empty or link.dead:
                    break
                time.sleep(0.01)
            link.close()

    elapsed = time.monotonic() - t_start
    stats = {
        "frames": frame_id,
        "frames_with_hand": frames_with_hand,
        "elapsed_s": round(elapsed, 3),
        "effective_fps": round(frame_id / elapsed, 2) if elapsed > 0 else 0.0,
        "sent": link.sent if link else 0,
        "send_dropped": link.dropped if link else 0,
        "engine_connected": link is not None and not link.dead,
        "clock_offset_us": offset_us,
    }
    if stats["send_dropped"]:
        log.warning("send buffer shed %d frames", stats["send_dropped"])
    return stats
