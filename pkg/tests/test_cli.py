import json

import pytest

from touchnav.cli import main
from touchnav.logger import LOG_HEADER, read_log


def _strip_timing_columns(csv_bytes: bytes) -> bytes:
    out = []
    for line in csv_bytes.splitlines():
        if line.startswith(b"#") or line == LOG_HEADER.encode():
            out.append(line)
        else:
            out.append(b",".join(line.split(b",")[:9]))  # drop proc_ms, render_ms
    return b"\n".join(out)


@pytest.fixture(scope="module")
def golden_trace(tmp_path_factory):
    path = tmp_path_factory.mktemp("golden") / "golden.ndjson"
    assert main(["synth", "--golden", "--out", str(path)]) == 0
    return path


def test_synth_requires_exactly_one_source(tmp_path):
    assert main(["synth", "--out", str(tmp_path / "x.ndjson")]) == 2
    script = tmp_path / "s.txt"
    script.write_text("idle 5\n")
    assert main(["synth", "--golden", "--script", str(script),
                 "--out", str(tmp_path / "x.ndjson")]) == 2


def test_replay_deterministic_csv_modulo_timing(golden_trace, tmp_path):
    logs, cmds = [], []
    for i in range(2):
        log = tmp_path / f"run{i}.csv"
        cmd = tmp_path / f"run{i}.commands"
        assert main(["replay", str(golden_trace), "--log", str(log),
                     "--commands", str(cmd), "--no-report"]) == 0
        logs.append(log.read_bytes())
        cmds.append(cmd.read_bytes())
    assert cmds[0] == cmds[1]
    assert _strip_timing_columns(logs[0]) == _strip_timing_columns(logs[1])


def test_replay_sensitivity_scales_payloads(golden_trace, tmp_path):
    base_cmd = tmp_path / "s1.commands"
    main(["replay", str(golden_trace), "--log", str(tmp_path / "s1.csv"),
          "--commands", str(base_cmd), "--no-report"])
    scaled_cmd = tmp_path / "s2.commands"
    main(["replay", str(golden_trace), "--log", str(tmp_path / "s2.csv"),
          "--commands", str(scaled_cmd), "--no-report", "--sensitivity", "2"])
    # payloads double wherever both runs emitted (gating differs at the
    # margins since the effective dead zone halves, so compare pairwise)
    base = [json.loads(l) for l in base_cmd.read_text().splitlines()]
    scaled = [json.loads(l) for l in scaled_cmd.read_text().splitlines()]
    assert len(base) == len(scaled)
    compared = 0
    for a, b in zip(base, scaled):
        if a["kind"] != "NONE" and b["kind"] != "NONE":
            assert a["kind"] == b["kind"]
            for key in ("dx", "dy", "dzoom"):
                assert b[key] == pytest.approx(2 * a[key], rel=1e-9, abs=1e-15)
            compared += 1
    assert compared > 100


def test_realtime_replay_paces_by_capture_time(tmp_path):
    import time

    from touchnav.runtime import run_replay
    from touchnav.synth import generate_trace

    trace = tmp_path / "short.ndjson"
    generate_trace(trace, "fps 30\nnoise 0\n\nidle 10\n")  # 10 frames = 0.3 s
    t0 = time.perf_counter()
    run_replay(trace, log_path=tmp_path / "rt.csv", realtime=True)
    assert time.perf_counter() - t0 >= 0.29


def test_empty_trace_replay(tmp_path):
    trace = tmp_path / "empty.ndjson"
    trace.write_text("# ts-trace/1\n")
    log = tmp_path / "empty.csv"
    assert main(["replay", str(trace), "--log", str(log)]) == 0
    assert read_log(log) == []


def test_replay_malformed_trace_exit_code(tmp_path, capsys):
    trace = tmp_path / "bad.ndjson"
    trace.write_text("{nope\n")
    assert main(["replay", str(trace), "--log", str(tmp_path / "x.csv")]) == 3
    assert "line 1" in capsys.readouterr().err


def test_analyze_in_band_fixture_exit_zero(tmp_path, capsys):
    rows = ["# schema=tslog/1", LOG_HEADER]
    # alternate SHIFT/NONE so the switching rate lands in [2,5] at 30 fps
    t = 0
    for i in range(400):
        mode = "SHIFT" if (i // 10) % 2 == 0 else "NONE"
        action = "SHIFT" if mode == "SHIFT" and i % 5 else ""
        tip_x = 300.0 + 20.0 * (i % 10)
        rows.append(f"s1,{i},{t},{mode},{action},{tip_x},400.0,0.05,150.0,45.0,22.0")
        t += 33_333
    log = tmp_path / "fix.csv"
    log.write_text("\n".join(rows) + "\n")
    code = main(["analyze", str(log)])
    out = capsys.readouterr().out
    assert code == 0, out
    assert "in-band" in out


def test_analyze_out_of_band_exit_one(tmp_path, capsys):
    rows = ["# schema=tslog/1", LOG_HEADER]
    for i in range(100):
        mode = "SHIFT" if (i // 10) % 2 == 0 else "NONE"
        action = "SHIFT" if mode == "SHIFT" and i % 5 else ""
        rows.append(f"s1,{i},{i * 33333},{mode},{action},"
                    f"{300.0 + 20 * (i % 10)},400.0,0.05,150.0,60.0,22.0")
    log = tmp_path / "slow.csv"
    log.write_text("\n".join(rows) + "\n")
    assert main(["analyze", str(log)]) == 1
    assert "above" in capsys.readouterr().out


def test_analyze_band_override(tmp_path):
    rows = ["# schema=tslog/1", LOG_HEADER]
    for i in range(100):
        mode = "SHIFT" if (i // 10) % 2 == 0 else "NONE"
        action = "SHIFT" if mode == "SHIFT" and i % 5 else ""
        rows.append(f"s1,{i},{i * 33333},{mode},{action},"
                    f"{300.0 + 20 * (i % 10)},400.0,0.05,150.0,60.0,22.0")
    log = tmp_path / "slow.csv"
    log.write_text("\n".join(rows) + "\n")
    assert main(["analyze", str(log), "--band-proc", "10:75",
                 "--band-fps-min", "15"]) == 0


def test_analyze_missing_header_exit_three(tmp_path, capsys):
    log = tmp_path / "bad.csv"
    log.write_text("nope,nope\n1,2\n")
    assert main(["analyze", str(log)]) == 3
    assert "session_id" in capsys.readouterr().err


def test_analyze_kv_output(tmp_path, capsys):
    log = tmp_path / "kv.csv"
    rows = ["# schema=tslog/1", LOG_HEADER]
    for i in range(20):
        rows.append(f"s1,{i},{i * 33333},SHIFT,SHIFT,{300.0 + 3 * i},400.0,0.05,150.0,45.0,")
    log.write_text("\n".join(rows) + "\n")
    main(["analyze", str(log), "--kv"])
    out = capsys.readouterr().out
    assert "schema=tsmetrics/1" in out
    assert "global.cmd_gen_ratio=1.0" in out
    assert "shift.n_frames=20" in out


def test_analyze_multiple_logs_pool(tmp_path):
    def write(path, session):
        rows = ["# schema=tslog/1", LOG_HEADER]
        for i in range(30):
            rows.append(f"{session},{i},{i * 33333},SHIFT,SHIFT,"
                        f"{300.0 + 11 * i},400.0,0.05,150.0,45.0,")
        path.write_text("\n".join(rows) + "\n")

    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write(a, "sa")
    write(b, "sb")
    assert main(["analyze", str(a), str(b), "--band-switching", "0:5"]) == 0


def test_config_file_flag(golden_trace, tmp_path):
    conf = tmp_path / "tn.conf"
    conf.write_text("shift_gain = 2.0\n")
    cmd1 = tmp_path / "c1.commands"
    cmd2 = tmp_path / "c2.commands"
    main(["replay", str(golden_trace), "--log", str(tmp_path / "l1.csv"),
          "--commands", str(cmd1), "--no-report"])
    main(["replay", str(golden_trace), "--log", str(tmp_path / "l2.csv"),
          "--commands", str(cmd2), "--no-report", "--config", str(conf)])
    base = [json.loads(l) for l in cmd1.read_text().splitlines()]
    conf_run = [json.loads(l) for l in cmd2.read_text().splitlines()]
    shift_pairs = [(a, b) for a, b in zip(base, conf_run) if a["kind"] == "SHIFT"]
    assert shift_pairs
    for a, b in shift_pairs:
        assert b["dx"] == pytest.approx(2 * a["dx"], rel=1e-12)
