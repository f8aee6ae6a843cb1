"""tsbridge command line: webcam (or mock) hand tracking to an engine."""

from __future__ import annotations

import argparse
import logging
import signal
import sys
import threading

from .bridge import BridgeConfig, run


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tsbridge",
        description="Stream 21-point hand landmarks to a touchless-navigation engine.",
    )
    p.add_argument("--engine", default="127.0.0.1:7465", metavar="HOST:PORT")
    p.add_argument("--camera", type=int, default=0, help="camera device index")
    p.add_argument("--width", type=int, default=1280)
    p.add_argument("--height", type=int, default=720)
    p.add_argument("--fps", type=int, default=30)
    p.add_argument("--record", metavar="TRACE", help="also write frames to a ts-trace/1 file")
    p.add_argument("--duration", type=float, default=0.0, help="stop after N seconds (0 = run forever)")
    p.add_argument("--mock", action="store_true", help="synthetic hand instead of a camera")
    p.add_argument("--min-detection-confidence", type=float, default=0.5)
    p.add_argument("--min-tracking-confidence", type=float, default=0.5)
    return p


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    host, _, port = args.engine.rpartition(":")
    try:
        cfg = BridgeConfig(
            engine_host=host or "127.0.0.1",
            engine_port=int(port),
            camera_index=args.camera,
            width=args.width,
            height=args.height,
            fps=args.fps,
            record_path=args.record,
            duration_s=args.duration,
            mock=args.mock,
            min_detection_confidence=args.min_detection_confidence,
            min_tracking_confidence=args.min_tracking_confidence,
        )
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    stop = threading.Event()
    signal.signal(signal.SIGINT, lambda *_: stop.set())
    signal.signal(signal.SIGTERM, lambda *_: stop.set())
    try:
        stats = run(cfg, stop)
    except RuntimeError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print("bridge summary:")
    for key in sorted(stats):
        print(f"  {key} = {stats[key]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
