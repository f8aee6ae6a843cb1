"""Capture bridge: hand-tracker samples out, ts-trace/1 wire frames in flight."""

from .bridge import BridgeConfig, EngineLink, clock_handshake, encode_frame, run
from .trackers import CameraTracker, SyntheticTracker, Tracker

__version__ = "0.1.0"

__all__ = ["BridgeConfig", "CameraTracker", "EngineLink", "SyntheticTracker",
           "Tracker", "clock_handshake", "encode_frame", "run"]
