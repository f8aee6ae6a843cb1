"""Rendering of metrics reports: table, key-value text, radar SVG."""

from __future__ import annotations

from .engine import ACTIVE_MODES
from .metrics import GLOBAL, FluidBand, MetricsReport, ModeReport, Verdict


def _fmt(v: float | None, digits: int = 3) -> str:
    return "-" if v is None else f"{v:.{digits}f}"


def _pair(mean: float | None, std: float | None, digits: int = 2) -> str:
    if mean is None:
        return "-"
    if std is None:
        return f"{mean:.{digits}f}"
    return f"{mean:.{digits}f} ± {std:.{digits}f}"


def format_table(report: MetricsReport, verdicts: dict[str, dict[str, Verdict]]) -> str:
    scopes = [m.value for m in ACTIVE_MODES] + [GLOBAL]
    reps: dict[str, ModeReport] = {**report.per_mode, GLOBAL: report.overall}

    def row(label: str, cells: list[str]) -> str:
        return f"{label:<22}" + "".join(f"{c:>24}" for c in cells)

    def vmark(scope: str, metric: str) -> str:
        v = verdicts[scope][metric]
        return "" if v is Verdict.ABSENT else f" [{v.value}]"

    lines = [row("metric", scopes)]
    lines.append(row("frames", [str(reps[s].n_frames) for s in scopes]))
    lines.append(row("commands", [str(reps[s].n_commands) for s in scopes]))
    lines.append(row("cmd-gen ratio", [
        _fmt(reps[s].cmd_gen_ratio) + vmark(s, "cmd_gen_ratio") for s in scopes]))
    lines.append(row("rms jitter (%)", [
        ("-" if reps[s].rms_jitter is None else f"{reps[s].rms_jitter * 100:.2f}")
        + vmark(s, "rms_jitter") for s in scopes]))
    lines.append(row("proc latency (ms)", [
        _pair(reps[s].proc_ms_mean, reps[s].proc_ms_std) + vmark(s, "proc_latency_ms")
        for s in scopes]))
    lines.append(row("render latency (ms)", [
        _pair(reps[s].render_ms_mean, reps[s].render_ms_std) + vmark(s, "render_latency_ms")
        for s in scopes]))
    lines.append(row("fps", [_fmt(reps[s].fps, 2) + vmark(s, "fps") for s in scopes]))
    sw = ["-"] * (len(scopes) - 1) + [_fmt(report.switching_rate, 2) + vmark(GLOBAL, "switching_rate")]
    lines.append(row("switching rate (/s)", sw))
    lines.append("")
    lines.append(f"sessions: {report.n_sessions}   rows: {report.n_rows}   "
                 f"resolution: {report.width}x{report.height}")
    if report.timing_note:
        lines.append(f"timing: {report.timing_note}")
    return "\n".join(lines)


def format_kv(report: MetricsReport, verdicts: dict[str, dict[str, Verdict]]) -> str:
    """Machine-readable key=value rendering, one metric per line."""
    out = ["schema=tsmetrics/1",
           f"n_sessions={report.n_sessions}",
           f"n_rows={report.n_rows}",
           f"width={report.width}",
           f"height={report.height}"]
    if report.timing_note:
        out.append(f"timing_note={report.timing_note}")
    reps: dict[str, ModeReport] = {**report.per_mode, GLOBAL: report.overall}
    for scope in [m.value for m in ACTIVE_MODES] + [GLOBAL]:
        rep = reps[scope]
        s = scope.lower()
        pairs = [
            ("n_frames", rep.n_frames), ("n_commands", rep.n_commands),
            ("cmd_gen_ratio", rep.cmd_gen_ratio), ("rms_jitter", rep.rms_jitter),
            ("proc_ms_mean", rep.proc_ms_mean), ("proc_ms_std", rep.proc_ms_std),
            ("proc_ms_std_sessions", rep.proc_ms_std_sessions),
            ("render_ms_mean", rep.render_ms_mean), ("render_ms_std", rep.render_ms_std),
            ("render_ms_std_sessions", rep.render_ms_std_sessions),
            ("fps", rep.fps), ("fps_session_mean", rep.fps_session_mean),
            ("fps_session_std", rep.fps_session_std),
        ]
        for name, val in pairs:
            out.append(f"{s}.{name}=" + ("" if val is None else repr(float(val)) if isinstance(val, float) else str(val)))
        for metric, verdict in verdicts[scope].items():
            out.append(f"{s}.{metric}.verdict={verdict.value}")
    out.append("global.switching_rate=" +
               ("" if report.switching_rate is None else repr(report.switching_rate)))
    return "\n".join(out)


_RADAR_AXES = (
    ("cmd-gen ratio", "cmd_gen_ratio"),
    ("rms jitter", "rms_jitter"),
    ("proc latency", "proc_latency_ms"),
    ("render latency", "render_latency_ms"),
    ("fps", "fps"),
    ("switching rate", "switching_rate"),
)


def write_radar_svg(path: str, report: MetricsReport, band: FluidBand | None = None) -> None:
    """Radar summary of the six global metrics against the fluid band.

    Each axis is normalized so the band interval maps to radius [0.5, 1.0]
    (the shaded ring); the fps floor is drawn as [fps_min, 2*fps_min].
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    band = band or FluidBand()
    rep = report.overall
    values = {
        "cmd_gen_ratio": rep.cmd_gen_ratio,
        "rms_jitter": rep.rms_jitter,
        "proc_latency_ms": rep.proc_ms_mean,
        "render_latency_ms": rep.render_ms_mean,
        "fps": rep.fps,
        "switching_rate": report.switching_rate,
    }
    intervals = {
        "cmd_gen_ratio": (band.cmd_gen_ratio.lo, band.cmd_gen_ratio.hi),
        "rms_jitter": (band.rms_jitter.lo, band.rms_jitter.hi),
        "proc_latency_ms": (band.proc_latency_ms.lo, band.proc_latency_ms.hi),
        "render_latency_ms": (band.render_latency_ms.lo, band.render_latency_ms.hi),
        "fps": (band.fps_min, 2 * band.fps_min),
        "switching_rate": (band.switching_rate.lo, band.switching_rate.hi),
    }

    def norm(key: str) -> float:
        v = values[key]
        if v is None:
            return 0.0
        lo, hi = intervals[key]
        r = 0.5 + 0.5 * (v - lo) / (hi - lo)
        return min(1.3, max(0.0, r))

    labels = [label for label, _ in _RADAR_AXES]
    keys = [key for _, key in _RADAR_AXES]
    angles = np.linspace(0, 2 * np.pi, len(keys), endpoint=False)
    radii = [norm(k) for k in keys]

    fig, ax = plt.subplots(subplot_kw={"projection": "polar"}, figsize=(5, 5))
    closed_angles = np.concatenate([angles, angles[:1]])
    ax.fill_between(np.linspace(0, 2 * np.pi, 120), 0.5, 1.0, color="tab:green", alpha=0.15,
                    label="fluid band")
    ax.plot(closed_angles, radii + radii[:1], color="tab:blue", linewidth=1.5, label="global")
    ax.fill(closed_angles, radii + radii[:1], color="tab:blue", alpha=0.2)
    ax.set_xticks(angles)
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_yticks([0.5, 1.0])
    ax.set_yticklabels(["band lo", "band hi"], fontsize=7)
    ax.set_ylim(0, 1.3)
    ax.legend(loc="lower right", bbox_to_anchor=(1.1, -0.1), fontsize=8)
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)
