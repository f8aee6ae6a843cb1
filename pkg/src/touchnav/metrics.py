"""Quantitative analysis of tslog/1 logs: the six performance metrics.

Per interaction mode and pooled over all active-mode rows, the analyzer
computes frame count, command-generation ratio (the probability that a
gesture frame actually induced a command), diagonal-normalized RMS jitter,
processing and rendering latency statistics and the effective frame rate
1000 / mean processing latency; globally it adds the mode switching rate
(transitions per second of overall interaction time). Each metric is
classified against a fluid band of empirical reference intervals.

Everything is computed from per-session sufficient statistics combined in
sorted-session order, so results are exactly invariant under shuffling
sessions and under concatenating per-session CSVs into one file.

Conventions worth knowing:

* Jitter deltas are taken only between consecutive frames of the same mode
  within the same session; deltas across gaps or re-acquisitions would mix
  tracking jumps into a stability metric.
* Latency standard deviations are reported twice, as the population over
  frames and as the spread of per-session means — published figures rarely
  say which convention they use, so both are labeled.
* The effective frame rate is likewise reported both as 1000 over the
  pooled mean latency and as the average of per-session rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .engine import ACTIVE_MODES, Mode
from .errors import EmptyMode, InsufficientData, ZeroDuration
from .logger import FrameRecord

GLOBAL = "GLOBAL"


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"interval lower bound {self.lo} above upper {self.hi}")


@dataclass(frozen=True)
class FluidBand:
    """Reference intervals within which interaction counts as fluid.

    Closed intervals; the frame-rate bound is one-sided (a floor).
    """

    switching_rate: Interval = Interval(2.0, 5.0)
    cmd_gen_ratio: Interval = Interval(0.8, 1.0)
    rms_jitter: Interval = Interval(0.005, 0.03)
    proc_latency_ms: Interval = Interval(10.0, 50.0)
    fps_min: float = 20.0
    render_latency_ms: Interval = Interval(10.0, 25.0)


class Verdict(str, Enum):
    IN_BAND = "in-band"
    BELOW = "below"
    ABOVE = "above"
    ABSENT = "absent"


def classify_interval(value: float | None, interval: Interval) -> Verdict:
    if value is None:
        return Verdict.ABSENT
    if value < interval.lo:
        return Verdict.BELOW
    if value > interval.hi:
        return Verdict.ABOVE
    return Verdict.IN_BAND


@dataclass
class _Welford:
    """Sum-based accumulator good enough for ms/pixel magnitudes."""

    n: int = 0
    total: float = 0.0
    total_sq: float = 0.0

    def add(self, v: float) -> None:
        self.n += 1
        self.total += v
        self.total_sq += v * v

    def merge(self, other: "_Welford") -> None:
        self.n += other.n
        self.total += other.total
        self.total_sq += other.total_sq

    @property
    def mean(self) -> float | None:
        return self.total / self.n if self.n else None

    @property
    def std(self) -> float | None:
        if not self.n:
            return None
        m = self.total / self.n
        return math.sqrt(max(0.0, self.total_sq / self.n - m * m))


@dataclass
class _ModeAccum:
    n: int = 0
    n_cmd: int = 0
    jitter_sq_sum: float = 0.0
    jitter_n: int = 0
    proc: _Welford = field(default_factory=_Welford)
    render: _Welford = field(default_factory=_Welford)


@dataclass
class SessionStats:
    """Sufficient statistics of one session; merging these is the pooling rule."""

    session_id: str
    n_rows: int = 0
    transitions: int = 0
    duration_us: int = 0
    per_mode: dict[str, _ModeAccum] = field(default_factory=dict)

    def accum(self, key: str) -> _ModeAccum:
        if key not in self.per_mode:
            self.per_mode[key] = _ModeAccum()
        return self.per_mode[key]


@dataclass
class ModeReport:
    """Aggregates for one mode (or the pooled active-mode GLOBAL scope)."""

    n_frames: int = 0
    n_commands: int = 0
    cmd_gen_ratio: float | None = None
    rms_jitter: float | None = None
    n_jitter_deltas: int = 0
    proc_ms_mean: float | None = None
    proc_ms_std: float | None = None
    proc_ms_std_sessions: float | None = None
    render_ms_mean: float | None = None
    render_ms_std: float | None = None
    render_ms_std_sessions: float | None = None
    n_render: int = 0
    fps: float | None = None
    fps_session_mean: float | None = None
    fps_session_std: float | None = None


@dataclass
class MetricsReport:
    per_mode: dict[str, ModeReport]
    overall: ModeReport
    switching_rate: float | None
    n_sessions: int
    n_rows: int
    width: int
    height: int
    timing_note: str = ""


def _jitter_pairs(rows: Sequence[FrameRecord]) -> Iterable[float]:
    """Squared pixel deltas between consecutive same-mode, same-session rows.

    ``rows`` must be in frame order per session. Consecutive means adjacent
    frame ids; a gap (mode switch, dropped frame, session boundary) ends the
    run and contributes nothing.
    """
    prev: FrameRecord | None = None
    for row in rows:
        if (prev is not None
                and row.session_id == prev.session_id
                and row.frame_id == prev.frame_id + 1
                and row.mode == prev.mode
                and row.mode in ACTIVE_MODES):
            if row.mode is Mode.ZOOM:
                if row.pinch_px is not None and prev.pinch_px is not None:
                    d = row.pinch_px - prev.pinch_px
                    yield d * d
            else:
                if None not in (row.tip_x_px, row.tip_y_px, prev.tip_x_px, prev.tip_y_px):
                    dx = row.tip_x_px - prev.tip_x_px
                    dy = row.tip_y_px - prev.tip_y_px
                    yield dx * dx + dy * dy
        prev = row


def cmd_gen_ratio(rows: Sequence[FrameRecord]) -> float:
    """Fraction of the given mode rows that produced a command."""
    if not rows:
        raise EmptyMode("no rows for this mode")
    return sum(1 for r in rows if r.action) / len(rows)


def rms_jitter(rows: Sequence[FrameRecord], width: int, height: int) -> float:
    """Diagonal-normalized RMS of frame-to-frame displacement.

    For SHIFT/ROTATE rows the displacement is the tracked fingertip delta;
    for ZOOM rows it is the pinch-distance delta. Dimensionless.
    """
    sq = list(_jitter_pairs(rows))
    if not sq:
        raise InsufficientData("need at least 2 consecutive same-mode rows")
    return math.sqrt(sum(sq) / len(sq)) / math.hypot(width, height)


@dataclass(frozen=True)
class LatencyStats:
    proc_ms_mean: float
    proc_ms_std: float
    render_ms_mean: float | None
    render_ms_std: float | None
    fps: float


def latency_and_fps(rows: Sequence[FrameRecord]) -> LatencyStats:
    """Latency means/stds over rows; fps = 1000 / mean processing latency."""
    if not rows:
        raise EmptyMode("no rows")
    proc = _Welford()
    render = _Welford()
    for r in rows:
        proc.add(r.proc_ms)
        if r.render_ms is not None:
            render.add(r.render_ms)
    return LatencyStats(
        proc_ms_mean=proc.mean,
        proc_ms_std=proc.std,
        render_ms_mean=render.mean,
        render_ms_std=render.std,
        fps=1000.0 / proc.mean,
    )


def switching_rate(rows: Sequence[FrameRecord]) -> float:
    """Mode transitions per second of overall interaction time.

    Transition = mode change between adjacent rows of a session, boundaries
    with NONE included. Interaction time sums each session's timestamp span.
    """
    stats = collect_session_stats(rows)
    if not stats:
        raise ZeroDuration("no rows")
    return _switching_from_stats(stats)


def _switching_from_stats(stats: dict[str, SessionStats]) -> float:
    transitions = 0
    duration_us = 0
    for sid in sorted(stats):
        s = stats[sid]
        if s.n_rows < 2:
            raise ZeroDuration(f"session {s.session_id!r} has a single frame")
        transitions += s.transitions
        duration_us += s.duration_us
    if duration_us <= 0:
        raise ZeroDuration("sessions span zero interaction time")
    return transitions / (duration_us / 1e6)


def collect_session_stats(rows: Iterable[FrameRecord]) -> dict[str, SessionStats]:
    """First pass: fold rows (in file order) into per-session statistics."""
    stats: dict[str, SessionStats] = {}
    prev_by_session: dict[str, FrameRecord] = {}
    first_t: dict[str, int] = {}
    for row in rows:
        sid = row.session_id
        st = stats.get(sid)
        if st is None:
            st = stats[sid] = SessionStats(session_id=sid)
            first_t[sid] = row.t_capture_us
        st.n_rows += 1
        st.duration_us = row.t_capture_us - first_t[sid]
        prev = prev_by_session.get(sid)
        if prev is not None and row.mode != prev.mode:
            st.transitions += 1
        if row.mode in ACTIVE_MODES:
            for key in (row.mode.value, GLOBAL):
                acc = st.accum(key)
                acc.n += 1
                if row.action:
                    acc.n_cmd += 1
                acc.proc.add(row.proc_ms)
                if row.render_ms is not None:
                    acc.render.add(row.render_ms)
        if (prev is not None
                and row.frame_id == prev.frame_id + 1
                and row.mode == prev.mode
                and row.mode in ACTIVE_MODES):
            sq = None
            if row.mode is Mode.ZOOM:
                if row.pinch_px is not None and prev.pinch_px is not None:
                    d = row.pinch_px - prev.pinch_px
                    sq = d * d
            elif None not in (row.tip_x_px, row.tip_y_px, prev.tip_x_px, prev.tip_y_px):
                dx = row.tip_x_px - prev.tip_x_px
                dy = row.tip_y_px - prev.tip_y_px
                sq = dx * dx + dy * dy
            if sq is not None:
                for key in (row.mode.value, GLOBAL):
                    acc = st.accum(key)
                    acc.jitter_sq_sum += sq
                    acc.jitter_n += 1
        prev_by_session[sid] = row
    return stats


def _mode_report(key: str, stats: dict[str, SessionStats], diag: float) -> ModeReport:
    total = _ModeAccum()
    session_proc_means: list[float] = []
    session_render_means: list[float] = []
    session_fps: list[float] = []
    for sid in sorted(stats):
        acc = stats[sid].per_mode.get(key)
        if acc is None or acc.n == 0:
            continue
        total.n += acc.n
        total.n_cmd += acc.n_cmd
        total.jitter_sq_sum += acc.jitter_sq_sum
        total.jitter_n += acc.jitter_n
        total.proc.merge(acc.proc)
        total.render.merge(acc.render)
        session_proc_means.append(acc.proc.mean)
        session_fps.append(1000.0 / acc.proc.mean if acc.proc.mean > 0 else math.inf)
        if acc.render.n:
            session_render_means.append(acc.render.mean)

    rep = ModeReport(n_frames=total.n, n_commands=total.n_cmd)
    if total.n == 0:
        return rep
    rep.cmd_gen_ratio = total.n_cmd / total.n
    rep.n_jitter_deltas = total.jitter_n
    if total.jitter_n:
        rep.rms_jitter = math.sqrt(total.jitter_sq_sum / total.jitter_n) / diag
    rep.proc_ms_mean = total.proc.mean
    rep.proc_ms_std = total.proc.std
    rep.n_render = total.render.n
    rep.render_ms_mean = total.render.mean
    rep.render_ms_std = total.render.std
    if rep.proc_ms_mean and rep.proc_ms_mean > 0:
        rep.fps = 1000.0 / rep.proc_ms_mean
    means = _Welford()
    for m in session_proc_means:
        means.add(m)
    rep.proc_ms_std_sessions = means.std
    if session_render_means:
        rmeans = _Welford()
        for m in session_render_means:
            rmeans.add(m)
        rep.render_ms_std_sessions = rmeans.std
    fstats = _Welford()
    for f in session_fps:
        if math.isfinite(f):
            fstats.add(f)
    rep.fps_session_mean = fstats.mean
    rep.fps_session_std = fstats.std
    return rep


def combine_session_stats(
    stats: dict[str, SessionStats], width: int, height: int, timing_note: str = ""
) -> MetricsReport:
    """Second pass: merge per-session statistics (the documented pooling rule).

    Sessions merge in sorted-id order, which is what makes the result exact
    under session permutation.
    """
    diag = math.hypot(width, height)
    per_mode = {m.value: _mode_report(m.value, stats, diag) for m in ACTIVE_MODES}
    overall = _mode_report(GLOBAL, stats, diag)
    n_rows = sum(s.n_rows for s in stats.values())
    switching: float | None = None
    if stats:
        switching = _switching_from_stats(stats)
    return MetricsReport(
        per_mode=per_mode,
        overall=overall,
        switching_rate=switching,
        n_sessions=len(stats),
        n_rows=n_rows,
        width=width,
        height=height,
        timing_note=timing_note,
    )


def analyze_rows(
    rows: Iterable[FrameRecord], width: int, height: int, timing_note: str = ""
) -> MetricsReport:
    """Full analysis of a row stream (the CSV contract's in-memory form)."""
    return combine_session_stats(collect_session_stats(rows), width, height, timing_note)


def classify(report: MetricsReport, band: FluidBand | None = None) -> dict[str, dict[str, Verdict]]:
    """Label every metric in-band / below / above (absent when uncomputable)."""
    band = band or FluidBand()
    out: dict[str, dict[str, Verdict]] = {}
    scopes: list[tuple[str, ModeReport]] = [(m.value, report.per_mode[m.value]) for m in ACTIVE_MODES]
    scopes.append((GLOBAL, report.overall))
    for name, rep in scopes:
        verdicts = {
            "cmd_gen_ratio": classify_interval(rep.cmd_gen_ratio, band.cmd_gen_ratio),
            "rms_jitter": classify_interval(rep.rms_jitter, band.rms_jitter),
            "proc_latency_ms": classify_interval(rep.proc_ms_mean, band.proc_latency_ms),
            "render_latency_ms": classify_interval(rep.render_ms_mean, band.render_latency_ms),
            "fps": (Verdict.ABSENT if rep.fps is None
                    else Verdict.IN_BAND if rep.fps >= band.fps_min else Verdict.BELOW),
        }
        if name == GLOBAL:
            verdicts["switching_rate"] = classify_interval(report.switching_rate, band.switching_rate)
        out[name] = verdicts
    return out


def any_out_of_band(verdicts: dict[str, dict[str, Verdict]]) -> bool:
    return any(v in (Verdict.BELOW, Verdict.ABOVE)
               for scope in verdicts.values() for v in scope.values())
