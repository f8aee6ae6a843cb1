"""Command-line entry point.

Subcommands mirror the pipeline: ``serve`` (live bridge in, viewer out),
``replay`` (trace to commands and metrics), ``record`` (wire to trace),
``analyze`` (tslog CSV to metrics and verdicts), ``synth`` (gesture script
to trace).

Exit codes, kept distinct per failure family:

    0  success (for analyze: every metric in-band)
    1  at least one metric out of band
    2  invalid usage, config or synth script
    3  malformed input data (trace, log schema, zero-duration session)
    4  I/O failure
    5  connection failure
"""

from __future__ import annotations

import argparse
import os
import signal
import sys

from .config import ENV_PREFIX, load_config_file, resolve_mode_config
from .errors import (
    ConfigInvalid,
    EmptyMode,
    InsufficientData,
    IoFailure,
    MalformedMessage,
    MalformedTrace,
    SchemaMismatch,
    SchemaViolation,
    SpecInvalid,
    TouchnavError,
    ZeroDuration,
)
from .logger import read_log
from .metrics import FluidBand, Interval, analyze_rows, any_out_of_band, classify
from .report import format_kv, format_table, write_radar_svg

EXIT_OK = 0
EXIT_OUT_OF_BAND = 1
EXIT_USAGE = 2
EXIT_BAD_DATA = 3
EXIT_IO = 4
EXIT_CONN = 5

_CFG_FLAGS = (
    "sensitivity", "depth_threshold", "depth_delta_margin", "extension_ratio",
    "pinch_engage", "dead_zone", "shift_gain", "rotate_gain", "zoom_gain",
)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE", help="key = value config file")
    p.add_argument("--sensitivity", type=float, help="global sensitivity knob (scales all thresholds and gains)")
    for name in _CFG_FLAGS[1:]:
        p.add_argument("--" + name.replace("_", "-"), type=float, dest=name)
    p.add_argument("--hysteresis-frames", type=int, dest="hysteresis_frames")
    p.add_argument("--depth-sign", type=int, dest="depth_sign", choices=(1, -1),
                   help="tracker depth convention: +1 if more-negative z is closer")


def _mode_config(args: argparse.Namespace):
    file_values = load_config_file(args.config) if args.config else None
    flags = {name: getattr(args, name, None)
             for name in (*_CFG_FLAGS, "hysteresis_frames", "depth_sign")}
    return resolve_mode_config(file_values, None, flags)


def _band(args: argparse.Namespace) -> FluidBand:
    def interval(default: Interval, raw: str | None) -> Interval:
        if raw is None:
            return default
        lo, _, hi = raw.partition(":")
        return Interval(float(lo), float(hi))

    d = FluidBand()
    return FluidBand(
        switching_rate=interval(d.switching_rate, args.band_switching),
        cmd_gen_ratio=interval(d.cmd_gen_ratio, args.band_ratio),
        rms_jitter=interval(d.rms_jitter, args.band_jitter),
        proc_latency_ms=interval(d.proc_latency_ms, args.band_proc),
        fps_min=d.fps_min if args.band_fps_min is None else args.band_fps_min,
        render_latency_ms=interval(d.render_latency_ms, args.band_render),
    )


def _add_band_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--band-switching", metavar="LO:HI")
    p.add_argument("--band-ratio", metavar="LO:HI")
    p.add_argument("--band-jitter", metavar="LO:HI")
    p.add_argument("--band-proc", metavar="LO:HI")
    p.add_argument("--band-render", metavar="LO:HI")
    p.add_argument("--band-fps-min", type=float)


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(ENV_PREFIX + name)
    return int(raw) if raw else default


def _print_report(report, band, kv: bool, radar: str | None) -> int:
    verdicts = classify(report, band)
    print(format_kv(report, verdicts) if kv else format_table(report, verdicts))
    if radar:
        write_radar_svg(radar, report, band)
    return EXIT_OUT_OF_BAND if any_out_of_band(verdicts) else EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    from .serve import EngineServer

    server = EngineServer(
        log_path=args.log,
        session_id=args.session_id,
        cfg=_mode_config(args),
        host=args.host,
        bridge_port=args.bridge_port,
        viewer_port=args.viewer_port,
        assets_dir=args.assets,
    )
    server.start()
    print(f"LISTEN bridge={server.bridge_port} viewer={server.viewer_port}", flush=True)
    signal.signal(signal.SIGTERM, lambda *_: server._stop.set())
    server.run_forever()
    stats = server.stop()
    print("session summary:", flush=True)
    for key in sorted(stats):
        print(f"  {key} = {stats[key]}")
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    from .runtime import run_replay

    result = run_replay(
        args.trace,
        cfg=_mode_config(args),
        log_path=args.log,
        commands_path=args.commands,
        session_id=args.session_id,
        realtime=args.realtime,
    )
    if args.no_report:
        return EXIT_OK
    band = _band(args)
    verdicts = classify(result.report, band)
    print(format_kv(result.report, verdicts) if args.kv else format_table(result.report, verdicts))
    if args.radar:
        write_radar_svg(args.radar, result.report, band)
    return EXIT_OK


def cmd_record(args: argparse.Namespace) -> int:
    from .recorder import record_trace

    count = record_trace(args.out, host=args.host, port=args.bridge_port)
    print(f"recorded {count} frames to {args.out}")
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    rows = read_log(args.logs)
    report = analyze_rows(rows, args.width, args.height)
    return _print_report(report, _band(args), args.kv, args.radar)


def cmd_synth(args: argparse.Namespace) -> int:
    from .synth import GOLDEN_SCRIPT, generate_trace

    if args.golden == (args.script is not None):
        raise ConfigInvalid("synth needs exactly one of --script or --golden")
    if args.script:
        try:
            with open(args.script, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise IoFailure(f"cannot read script {args.script}: {e}") from e
    else:
        text = GOLDEN_SCRIPT
    overrides = {"seed": args.seed, "fps": args.fps, "width": args.width, "height": args.height}
    count = generate_trace(args.out, text, overrides=overrides)
    print(f"wrote {count} frames to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="touchnav",
        description="Touchless image-navigation engine: landmark streams in, "
                    "pan/rotate/zoom commands out.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the live pipeline (bridge in, viewers out)")
    p.add_argument("--host", default=os.environ.get(ENV_PREFIX + "HOST", "127.0.0.1"))
    p.add_argument("--bridge-port", type=int, default=_env_int("BRIDGE_PORT", 7465))
    p.add_argument("--viewer-port", type=int, default=_env_int("VIEWER_PORT", 7466))
    p.add_argument("--log", required=True, help="session CSV output path")
    p.add_argument("--session-id", default="live")
    p.add_argument("--assets", help="static viewer bundle directory to serve over HTTP")
    _add_config_flags(p)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("replay", help="replay a recorded trace deterministically")
    p.add_argument("trace")
    p.add_argument("--log", required=True, help="session CSV output path")
    p.add_argument("--commands", help="deterministic command log output path")
    p.add_argument("--session-id", default="replay")
    p.add_argument("--realtime", action="store_true", help="pace frames by capture timestamps")
    p.add_argument("--no-report", action="store_true")
    p.add_argument("--kv", action="store_true", help="machine-readable report")
    p.add_argument("--radar", metavar="SVG", help="write a radar summary")
    _add_config_flags(p)
    _add_band_flags(p)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("record", help="record incoming wire frames to a trace file")
    p.add_argument("--host", default=os.environ.get(ENV_PREFIX + "HOST", "127.0.0.1"))
    p.add_argument("--bridge-port", type=int, default=_env_int("BRIDGE_PORT", 7465))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_record)

    p = sub.add_parser("analyze", help="compute metrics and fluid-band verdicts from tslog CSVs")
    p.add_argument("logs", nargs="+")
    p.add_argument("--width", type=int, default=1280, help="image width for jitter normalization")
    p.add_argument("--height", type=int, default=720)
    p.add_argument("--kv", action="store_true", help="machine-readable report")
    p.add_argument("--radar", metavar="SVG", help="write a radar summary")
    _add_band_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synth", help="generate a synthetic trace from a gesture script")
    p.add_argument("--script", help="gesture script path")
    p.add_argument("--golden", action="store_true", help="use the bundled reference script")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--fps", type=int)
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.set_defaults(func=cmd_synth)

    return parser


_ERROR_EXIT = (
    ((ConfigInvalid, SpecInvalid), EXIT_USAGE),
    ((MalformedTrace, SchemaMismatch, SchemaViolation, MalformedMessage,
      ZeroDuration, EmptyMode, InsufficientData), EXIT_BAD_DATA),
    ((IoFailure,), EXIT_IO),
    ((ConnectionError, OSError), EXIT_CONN),
)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TouchnavError as e:
        for types, code in _ERROR_EXIT:
            if isinstance(e, types):
                print(f"error: {e}", file=sys.stderr)
                return code
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ConnectionError, OSError) as e:
        print(f"connection error: {e}", file=sys.stderr)
        return EXIT_CONN


if __name__ == "__main__":
    sys.exit(main())
