"""Live serving: bridge frames in, commands out, one CSV per session.

Three flows joined by bounded queues, exactly one of which mutates gesture
state:

* ingestion — accepts one bridge connection at a time on the bridge port,
  answers clock-handshake echoes, validates frames, drops-and-counts
  malformed or stale ones, and feeds the engine queue (a full queue stalls
  ingestion rather than losing rows);
* engine + logging — single-threaded, in arrival order: step, log row,
  broadcast;
* viewer broadcast — any number of subscribers on the viewer port. Raw
  socket clients speak newline-delimited JSON; a browser can connect to the
  same port, which sniffs an HTTP request and either upgrades to WebSocket
  or serves the static viewer bundle.

Broadcast is latest-wins per subscriber: commands are relative increments,
and a stalled viewer is better resynced by the next increment than fed a
backlog of stale ones. Dropped increments are counted and reported in the
session summary.

Messages on the viewer channel:

* engine -> viewer: ``{"seq":n,"kind":"SHIFT","dx":..,"dy":..,"dzoom":..,"mode":"SHIFT"}``
* viewer -> engine: ``{"cmd_seq":n,"t_presented_us":t}`` acknowledgments
  (``t`` already converted to the engine clock) and
  ``{"echo":i,"t0_us":t}`` handshake probes, answered in place with
  ``{"echo":i,"t0_us":t,"t_engine_us":now}``.

The bridge channel accepts the same echo probes ahead of its frame stream,
which is how ``t_capture_us`` ends up in the engine clock domain.
"""

from __future__ import annotations

import json
import logging
import os
import queue
import socket
import threading
import time
from collections import OrderedDict

from . import ws
from .engine import GestureEngine, Mode, ModeConfig
from .errors import TouchnavError
from .landmarks import decode_wire_frame
from .logger import FrameRecord, SessionLogger
from .runtime import frame_features

log = logging.getLogger("touchnav.serve")

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".svg": "image/svg+xml",
    ".json": "application/json",
    ".map": "application/json",
    ".ico": "image/x-icon",
}


def monotonic_us() -> int:
    return time.monotonic_ns() // 1000


class _Subscriber:
    """One viewer connection's send side, latest-wins with a drop counter."""

    def __init__(self, send_raw, name: str):
        self._send_raw = send_raw
        self.name = name
        self._cond = threading.Condition()
        self._pending: str | None = None
        self.dropped = 0
        self.sent = 0
        self.alive = True
        self._thread = threading.Thread(target=self._run, name=f"viewer-send-{name}", daemon=True)
        self._thread.start()

    def offer(self, line: str) -> None:
        with self._cond:
            if not self.alive:
                return
            if self._pending is not None:
                self.dropped += 1
            self._pending = line
            self._cond.notify()

    def close(self) -> None:
        with self._cond:
            self.alive = False
            self._cond.notify()

    def _run(self) -> None:
        while True:
            with self._cond:
                while self._pending is None and self.alive:
                    self._cond.wait()
                if not self.alive and self._pending is None:
                    return
                line, self._pending = self._pending, None
            try:
                self._send_raw(line)
                self.sent += 1
            except OSError:
                with self._cond:
                    self.alive = False
                return


class EngineServer:
    """The live pipeline behind the ``serve`` subcommand."""

    RENDER_WINDOW = 128  # frames a row waits for its ack before flushing

    def __init__(
        self,
        log_path,
        session_id: str,
        cfg: ModeConfig | None = None,
        host: str = "127.0.0.1",
        bridge_port: int = 7465,
        viewer_port: int = 7466,
        assets_dir: str | None = None,
    ):
        self.cfg = cfg or ModeConfig()
        self.engine = GestureEngine(self.cfg)
        self.logger = SessionLogger(log_path, session_id)
        self.session_id = session_id
        self.host = host
        self.assets_dir = assets_dir
        self._stop = threading.Event()
        self._frames: queue.Queue = queue.Queue(maxsize=256)
        self._subscribers: list[_Subscriber] = []
        self._subs_lock = threading.Lock()
        self._pending: OrderedDict[int, dict] = OrderedDict()
        self._seq_to_frame: dict[int, int] = {}
        self._emit_us: dict[int, int] = {}
        self._pending_lock = threading.Lock()
        self._seq = 0
        self.stats = {
            "frames": 0, "commands": 0, "broadcast_drops": 0, "broadcast_sent": 0,
            "malformed_dropped": 0, "stale_dropped": 0, "bridge_gaps": 0,
            "late_acks": 0, "subscribers": 0,
        }
        self._last_frame_id = -1
        self._threads: list[threading.Thread] = []

        self._bridge_sock = self._listen(bridge_port)
        self._viewer_sock = self._listen(viewer_port)
        self.bridge_port = self._bridge_sock.getsockname()[1]
        self.viewer_port = self._viewer_sock.getsockname()[1]

    def _listen(self, port: int) -> socket.socket:
        s = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        s.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        s.bind((self.host, port))
        s.listen(4)
        s.settimeout(0.25)
        return s

    def start(self) -> None:
        for target, name in ((self._bridge_accept_loop, "bridge-accept"),
                             (self._viewer_accept_loop, "viewer-accept"),
                             (self._engine_loop, "engine")):
            t = threading.Thread(target=target, name=name, daemon=True)
            t.start()
            self._threads.append(t)

    def run_forever(self) -> None:
        try:
            while not self._stop.is_set():
                time.sleep(0.2)
        except KeyboardInterrupt:
            pass

    # -- ingestion --------------------------------------------------------

    def _bridge_accept_loop(self) -> None:
        while not self._stop.is_set():
            try:
                conn, addr = self._bridge_sock.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            log.info("bridge connected from %s", addr)
            self._serve_bridge(conn)
            if not self._stop.is_set():
                self.stats["bridge_gaps"] += 1
                log.warning("bridge disconnected; logging gap and waiting for reconnect")

    def _serve_bridge(self, conn: socket.socket) -> None:
        conn.settimeout(0.25)
        buf = b""
        with conn:
            while not self._stop.is_set():
                try:
                    chunk = conn.recv(65536)
                except socket.timeout:
                    continue
                except OSError:
                    return
                if not chunk:
                    return
                buf += chunk
                while b"\n" in buf:
                    line, buf = buf.split(b"\n", 1)
                    if not line.strip():
                        continue
                    self._bridge_line(conn, line)

    def _bridge_line(self, conn: socket.socket, line: bytes) -> None:
        if b'"echo"' in line:
            try:
                msg = json.loads(line)
                reply = {"echo": msg["echo"], "t0_us": msg["t0_us"], "t_engine_us": monotonic_us()}
                conn.sendall((json.dumps(reply, separators=(",", ":")) + "\n").encode())
            except (ValueError, KeyError, OSError):
                self.stats["malformed_dropped"] += 1
            return
        try:
            frame = decode_wire_frame(line)
        except TouchnavError:
            self.stats["malformed_dropped"] += 1
            return
        if frame.frame_id <= self._last_frame_id:
            self.stats["stale_dropped"] += 1
            return
        self._last_frame_id = frame.frame_id
        while not self._stop.is_set():
            try:
                self._frames.put(frame, timeout=0.25)
                return
            except queue.Full:
                continue  # backpressure: stall ingestion, never drop a row

    # -- engine + logging --------------------------------------------------

    def _engine_loop(self) -> None:
        while not (self._stop.is_set() and self._frames.empty()):
            try:
                frame = self._frames.get(timeout=0.1)
            except queue.Empty:
                continue
            command = self.engine.process(frame)
            mode = self.engine.state.mode
            tip_x, tip_y, rel_depth, pinch_px = frame_features(frame, mode)
            now = monotonic_us()
            proc_ms = max(0.0, (now - frame.t_capture_us) / 1000.0)

            self._seq += 1
            seq = self._seq
            msg = {"seq": seq, "kind": command.kind.value,
                   "dx": command.dx, "dy": command.dy, "dzoom": command.dzoom,
                   "mode": mode.value}
            line = json.dumps(msg, separators=(",", ":"))
            with self._subs_lock:
                subs = list(self._subscribers)
            for sub in subs:
                sub.offer(line)

            row = dict(
                session_id=self.session_id,
                frame_id=frame.frame_id,
                t_capture_us=frame.t_capture_us,
                mode=mode,
                action=command.kind.value if command.kind is not Mode.NONE else "",
                tip_x_px=tip_x, tip_y_px=tip_y, rel_depth=rel_depth, pinch_px=pinch_px,
                proc_ms=proc_ms, render_ms=None,
            )
            self.stats["frames"] += 1
            if command.kind is not Mode.NONE:
                self.stats["commands"] += 1
            with self._pending_lock:
                self._pending[frame.frame_id] = row
                self._seq_to_frame[seq] = frame.frame_id
                self._emit_us[seq] = now
                while len(self._pending) > self.RENDER_WINDOW:
                    _, oldest = self._pending.popitem(last=False)
                    self.logger.log_frame(FrameRecord(**oldest))
        self._flush_pending()

    def _flush_pending(self) -> None:
        with self._pending_lock:
            rows = list(self._pending.values())
            self._pending.clear()
            self._seq_to_frame.clear()
            self._emit_us.clear()
        for row in rows:
            self.logger.log_frame(FrameRecord(**row))

    def _on_ack(self, seq: int, t_presented_us: int) -> None:
        with self._pending_lock:
            frame_id = self._seq_to_frame.get(seq)
            emit = self._emit_us.get(seq)
            if frame_id is None or emit is None or frame_id not in self._pending:
                self.stats["late_acks"] += 1
                return
            self._pending[frame_id]["render_ms"] = max(0.0, (t_presented_us - emit) / 1000.0)

    # -- viewer side -------------------------------------------------------

    def _viewer_accept_loop(self) -> None:
        while not self._stop.is_set():
            try:
                conn, addr = self._viewer_sock.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            t = threading.Thread(target=self._serve_viewer, args=(conn, addr),
                                 name=f"viewer-{addr[1]}", daemon=True)
            t.start()

    def _serve_viewer(self, conn: socket.socket, addr) -> None:
        # Sniff the first bytes to route the connection: an HTTP client sends
        # its request line immediately, so a short silence means a raw ndjson
        # subscriber that is just listening.
        conn.settimeout(0.25)
        buf = b""
        deadline = time.monotonic() + 0.3
        try:
            while len(buf) < 4 and not self._stop.is_set() and time.monotonic() < deadline:
                try:
                    chunk = conn.recv(4096)
                except socket.timeout:
                    continue
                if not chunk:
                    conn.close()
                    return
                buf += chunk
        except OSError:
            conn.close()
            return
        if buf.startswith(b"GET "):
            self._serve_http(conn, buf)
        else:
            self._serve_ndjson_viewer(conn, addr, buf)

    def _attach_subscriber(self, send_raw, name: str) -> _Subscriber:
        sub = _Subscriber(send_raw, name)
        with self._subs_lock:
            self._subscribers.append(sub)
        self.stats["subscribers"] += 1
        log.info("viewer %s subscribed", name)
        return sub

    def _detach_subscriber(self, sub: _Subscriber) -> None:
        sub.close()
        with self._subs_lock:
            if sub in self._subscribers:
                self._subscribers.remove(sub)
        self.stats["broadcast_drops"] += sub.dropped
        self.stats["broadcast_sent"] += sub.sent

    def _viewer_message(self, conn: socket.socket, text: str, write_lock: threading.Lock,
                        send_text) -> None:
        try:
            msg = json.loads(text)
        except ValueError:
            self.stats["malformed_dropped"] += 1
            return
        if not isinstance(msg, dict):
            self.stats["malformed_dropped"] += 1
            return
        if "echo" in msg:
            reply = {"echo": msg.get("echo"), "t0_us": msg.get("t0_us"),
                     "t_engine_us": monotonic_us()}
            with write_lock:
                try:
                    send_text(json.dumps(reply, separators=(",", ":")))
                except OSError:
                    pass
            return
        if "cmd_seq" in msg and "t_presented_us" in msg:
            try:
                self._on_ack(int(msg["cmd_seq"]), int(msg["t_presented_us"]))
            except (TypeError, ValueError):
                self.stats["malformed_dropped"] += 1
            return
        self.stats["malformed_dropped"] += 1

    def _serve_ndjson_viewer(self, conn: socket.socket, addr, initial: bytes) -> None:
        write_lock = threading.Lock()

        def send_text(text: str) -> None:
            conn.sendall((text + "\n").encode("utf-8"))

        def send_broadcast(line: str) -> None:
            with write_lock:
                send_text(line)

        sub = self._attach_subscriber(send_broadcast, f"tcp:{addr[1]}")
        buf = initial
        try:
            while not self._stop.is_set():
                while b"\n" in buf:
                    line, buf = buf.split(b"\n", 1)
                    if line.strip():
                        self._viewer_message(conn, line.decode("utf-8", "replace"),
                                             write_lock, send_text)
                try:
                    chunk = conn.recv(65536)
                except socket.timeout:
                    continue
                except OSError:
                    break
                if not chunk:
                    break
                buf += chunk
        finally:
            self._detach_subscriber(sub)
            conn.close()

    # -- HTTP / WebSocket --------------------------------------------------

    def _serve_http(self, conn: socket.socket, buf: bytes) -> None:
        deadline = time.monotonic() + 5.0
        while b"\r\n\r\n" not in buf and time.monotonic() < deadline:
            try:
                chunk = conn.recv(4096)
            except socket.timeout:
                continue
            except OSError:
                conn.close()
                return
            if not chunk:
                conn.close()
                return
            buf += chunk
        head, _, rest = buf.partition(b"\r\n\r\n")
        lines = head.decode("latin-1", "replace").split("\r\n")
        path = lines[0].split(" ")[1] if len(lines[0].split(" ")) > 1 else "/"
        headers = {}
        for h in lines[1:]:
            if ":" in h:
                k, _, v = h.partition(":")
                headers[k.strip().lower()] = v.strip()

        if headers.get("upgrade", "").lower() == "websocket" and "sec-websocket-key" in headers:
            try:
                conn.sendall(ws.upgrade_response(headers["sec-websocket-key"]))
            except OSError:
                conn.close()
                return
            self._serve_ws_viewer(conn, rest)
            return

        self._serve_static(conn, path)

    def _serve_ws_viewer(self, conn: socket.socket, initial: bytes) -> None:
        write_lock = threading.Lock()

        def send_text(text: str) -> None:
            conn.sendall(ws.encode_frame(text.encode("utf-8")))

        def send_broadcast(line: str) -> None:
            with write_lock:
                send_text(line)

        sub = self._attach_subscriber(send_broadcast, "ws")
        decoder = ws.FrameDecoder()
        pending = decoder.feed(initial) if initial else []
        try:
            while not self._stop.is_set():
                for opcode, payload in pending:
                    if opcode == ws.OP_CLOSE:
                        return
                    if opcode == ws.OP_PING:
                        with write_lock:
                            conn.sendall(ws.encode_frame(payload, ws.OP_PONG))
                    elif opcode == ws.OP_TEXT:
                        self._viewer_message(conn, payload.decode("utf-8", "replace"),
                                             write_lock, send_text)
                pending = []
                try:
                    chunk = conn.recv(65536)
                except socket.timeout:
                    continue
                except OSError:
                    return
                if not chunk:
                    return
                pending = decoder.feed(chunk)
        finally:
            self._detach_subscriber(sub)
            conn.close()

    def _serve_static(self, conn: socket.socket, path: str) -> None:
        try:
            body, status, ctype = self._load_asset(path)
            head = (f"HTTP/1.1 {status}\r\nContent-Type: {ctype}\r\n"
                    f"Content-Length: {len(body)}\r\nConnection: close\r\n\r\n")
            conn.sendall(head.encode("ascii") + body)
        except OSError:
            pass
        finally:
            conn.close()

    def _load_asset(self, path: str) -> tuple[bytes, str, str]:
        if self.assets_dir is None:
            return b"no viewer assets configured\n", "404 Not Found", "text/plain"
        rel = path.split("?", 1)[0].lstrip("/") or "index.html"
        root = os.path.realpath(self.assets_dir)
        full = os.path.realpath(os.path.join(root, rel))
        if not full.startswith(root + os.sep) and full != root:
            return b"forbidden\n", "403 Forbidden", "text/plain"
        if os.path.isdir(full):
            full = os.path.join(full, "index.html")
        try:
            with open(full, "rb") as fh:
                body = fh.read()
        except OSError:
            return b"not found\n", "404 Not Found", "text/plain"
        ext = os.path.splitext(full)[1].lower()
        return body, "200 OK", _CONTENT_TYPES.get(ext, "application/octet-stream")

    # -- shutdown ----------------------------------------------------------

    def stop(self) -> dict:
        """Graceful shutdown: drain, flush, finalize the CSV, return totals."""
        self._stop.set()
        for s in (self._bridge_sock, self._viewer_sock):
            try:
                s.close()
            except OSError:
                pass
        for t in self._threads:
            t.join(timeout=5.0)
        with self._subs_lock:
            subs = list(self._subscribers)
        for sub in subs:
            self._detach_subscriber(sub)
        summary = self.logger.close()
        self.stats["wall_time_us"] = summary.wall_time_us
        self.stats["mode_counts"] = dict(summary.mode_counts)
        return dict(self.stats)
