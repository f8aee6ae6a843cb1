"""Record incoming wire frames straight to a trace file (no engine)."""

from __future__ import annotations

import json
import logging
import socket

from .errors import IoFailure, TouchnavError
from .landmarks import decode_wire_frame, encode_wire_frame
from .serve import monotonic_us
from .trace import TRACE_HEADER

log = logging.getLogger("touchnav.record")


def record_trace(out_path, host: str = "127.0.0.1", port: int = 7465) -> int:
    """Accept one bridge connection and persist its frames until it closes.

    Answers clock-handshake echoes like the live engine does, validates
    every frame, and drops-and-counts anything malformed or stale.
    """
    listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    listener.bind((host, port))
    listener.listen(1)
    print(f"LISTEN bridge={listener.getsockname()[1]}", flush=True)

    count = 0
    dropped = 0
    last_id = -1
    try:
        with open(out_path, "wb") as out:
            out.write(TRACE_HEADER.encode("utf-8"))
            conn, addr = listener.accept()
            log.info("bridge connected from %s", addr)
            buf = b""
            with conn:
                while True:
                    chunk = conn.recv(65536)
                    if not chunk:
                        break
                    buf += chunk
                    while b"\n" in buf:
                        line, buf = buf.split(b"\n", 1)
                        if not line.strip():
                            continue
                        if b'"echo"' in line:
                            try:
                                msg = json.loads(line)
                                reply = {"echo": msg["echo"], "t0_us": msg["t0_us"],
                                         "t_engine_us": monotonic_us()}
                                conn.sendall((json.dumps(reply, separators=(",", ":")) + "\n").encode())
                            except (ValueError, KeyError, OSError):
                                dropped += 1
                            continue
                        try:
                            frame = decode_wire_frame(line)
                        except TouchnavError:
                            dropped += 1
                            continue
                        if frame.frame_id <= last_id:
                            dropped += 1
                            continue
                        last_id = frame.frame_id
                        out.write(encode_wire_frame(frame))
                        count += 1
    except KeyboardInterrupt:
        pass
    except OSError as e:
        raise IoFailure(f"recording failed: {e}") from e
    finally:
        listener.close()
    if dropped:
        log.warning("dropped %d malformed/stale messages", dropped)
    return count
