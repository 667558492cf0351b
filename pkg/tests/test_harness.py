"""Verification-suite plumbing: config parsing, determinism, emitters."""

import re

import numpy as np
import pytest

from qconformal.harness import (DEFAULT_TOLERANCES, CheckReport, SuiteConfig,
                                emit_report, render_csv, render_json,
                                render_text, run_suite, suite_passed)


def _strip_runtime(csv_text: str) -> str:
    # the runtime column is the only timing-dependent field
    return "\n".join(",".join(line.split(",")[:-1])
                     for line in csv_text.splitlines())


def test_runs_are_deterministic_for_fixed_seed():
    cfg = SuiteConfig(seed=99, only=("kernel-f4-closed-form", "jensen"))
    first = render_csv(run_suite(cfg))
    second = render_csv(run_suite(SuiteConfig(
        seed=99, only=("kernel-f4-closed-form", "jensen"))))
    assert _strip_runtime(first) == _strip_runtime(second)


def test_empty_roster_runs_nothing_and_passes():
    reports = run_suite(SuiteConfig(roster="empty"))
    assert reports == []
    assert suite_passed(reports)


def test_emitters(tmp_path):
    ok = CheckReport.point("sphere-curvature", "identity", 1.0, 1.0, 1e-9)
    bad = CheckReport.point("jensen", "inequality", 1.0, 0.5, 1e-9)

    # empty report: csv is header-only
    path = emit_report([], "csv", str(tmp_path / "empty.csv"))
    text = open(path).read()
    assert text.splitlines() == [
        "id,anchor,expected,measured,tol,pass,runtime_ms"]

    # single passing report in json
    path = emit_report([ok], "json", str(tmp_path / "one.json"))
    import json
    data = json.load(open(path))
    assert len(data) == 1 and data[0]["pass"] is True
    assert data[0]["id"] == "sphere-curvature"

    # mixed text report: FAIL lines come after the passing ones
    path = emit_report([bad, ok], "text", str(tmp_path / "mix.txt"))
    lines = open(path).read().splitlines()
    assert lines[1].startswith("ok")
    assert lines[2].startswith("FAIL")
    assert lines[-1] == "-- 2 checks, 1 failing"

    with pytest.raises(ValueError):
        emit_report([], "yaml", str(tmp_path / "x.yaml"))


def test_tolerance_override_is_recorded_and_noted():
    cfg = SuiteConfig(only=("kernel-lieb-loss",),
                      tolerances={"kernel-lieb-loss": 1e-6})
    assert cfg.overridden == ("kernel-lieb-loss",)
    assert cfg.tolerances["kernel-lieb-loss"] == 1e-6
    # untouched entries keep their defaults
    assert cfg.tolerances["jensen"] == DEFAULT_TOLERANCES["jensen"]
    reports = run_suite(cfg)
    assert all("tolerance overridden by config" in r.note for r in reports)


def test_unknown_ids_rejected():
    with pytest.raises(ValueError):
        SuiteConfig(tolerances={"no-such-check": 1.0})
    with pytest.raises(ValueError):
        SuiteConfig(only=("no-such-check",))
    with pytest.raises(ValueError):
        SuiteConfig(roster="half")


def test_config_from_ini_file(tmp_path):
    path = tmp_path / "suite.ini"
    path.write_text(
        "[suite]\n"
        "seed = 7\n"
        "output_dir = out\n"
        "only = jensen, kernel-lieb-loss\n"
        "roster = full\n"
        "\n"
        "[tolerances]\n"
        "jensen = 1e-10   ; loosened\n")
    cfg = SuiteConfig.from_file(str(path))
    assert cfg.seed == 7
    assert cfg.output_dir == "out"
    assert cfg.only == ("jensen", "kernel-lieb-loss")
    assert cfg.tolerances["jensen"] == 1e-10
    assert cfg.overridden == ("jensen",)


def test_output_dir_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("QCONFORMAL_OUTPUT_DIR", str(tmp_path / "env_dir"))
    cfg = SuiteConfig(output_dir="ignored")
    assert cfg.output_dir == str(tmp_path / "env_dir")


def test_raising_check_reports_failure_not_crash(monkeypatch):
    from qconformal import harness

    def boom(ctx):
        raise RuntimeError("synthetic failure")

    monkeypatch.setitem(harness.CHECK_REGISTRY, "kernel-lieb-loss", boom)
    reports = run_suite(SuiteConfig(only=("kernel-lieb-loss",)))
    assert len(reports) == 1
    assert not reports[0].passed
    assert "RuntimeError" in reports[0].note


def test_render_json_roundtrips_interval_expectations():
    rep = CheckReport.interval("sign-regime", "bound", -np.inf, 0.0, -0.1,
                               0.02)
    import json
    data = json.loads(render_json([rep]))
    assert data[0]["expected"] == [-np.inf, 0.0] or \
        data[0]["expected"][1] == 0.0
    assert data[0]["pass"] is True


def test_render_text_formats_counts():
    rep = CheckReport.point("jensen", "x", 0.0, 0.0, 1.0)
    out = render_text([rep, rep])
    assert re.search(r"-- 2 checks, 0 failing", out)
