import os
import subprocess
import sys

import numpy as np
import pytest

from bmcarpet import cli
from bmcarpet.config import ConfigError, parse_config_text
from bmcarpet.spectra import exceptional_q0

EXCEPTIONAL = "m = 2\nn = 3\nn0 = 2\nn1 = 1\nq0 = exceptional   # A = -1\n"
EXPLICIT = "m = 2\nn = 3\ndigits = 0,0; 0,1; 1,0\np = 0.2, 0.2, 0.6\n"


@pytest.fixture
def cfg(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text(EXCEPTIONAL)
    return str(path)


def run(*argv):
    return cli.run([str(a) for a in argv])


def read_csv(path):
    lines = open(path, encoding="utf-8").read().splitlines()
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


def test_spectrum_csv(cfg, tmp_path):
    out = tmp_path / "curve.csv"
    assert run("spectrum", "--config", cfg, "--alpha-steps", 11, "--out", out) == 0
    header, rows = read_csv(out)
    assert header == ["alpha", "dim_H", "dim_P", "P", "regime"]
    assert len(rows) == 11
    assert rows[0][4] == rows[-1][4] == "A_minus_one_endpoint"
    assert all(float(r[2]) >= float(r[1]) for r in rows)
    raw = out.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")


def test_spectrum_is_byte_identical_across_runs_and_threads(cfg, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("spectrum", "--config", cfg, "--alpha-steps", 9, "--out", a) == 0
    assert run("spectrum", "--config", cfg, "--alpha-steps", 9, "--threads", 4, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()


def test_spectrum_explicit_alphas_and_svg(cfg, tmp_path):
    out, svg = tmp_path / "s.csv", tmp_path / "s.svg"
    assert run("spectrum", "--config", cfg, "--alpha", 1.0, "--alpha", 1.5, "--out", out, "--svg", svg) == 0
    _, rows = read_csv(out)
    assert [r[0] for r in rows] == ["1", "1.5"]
    assert float(rows[0][2]) == pytest.approx(0.910254259567, abs=1e-12)
    text = svg.read_text()
    assert 'viewBox="0 0 1000 700"' in text and text.count("<polyline") == 2


def test_force_regime_flag(cfg, tmp_path):
    out = tmp_path / "g.csv"
    assert run("spectrum", "--config", cfg, "--alpha", 1.0, "--force-regime", "generic", "--out", out) == 0
    _, rows = read_csv(out)
    assert rows[0][1] == rows[0][2] and rows[0][4] == "generic"


def test_scan_shows_jump(cfg, tmp_path):
    out = tmp_path / "scan.csv"
    assert run("scan-q0", "--config", cfg, "--alpha", 1.0, "--q0-min", 0.35, "--q0-max", 0.45, "--steps", 21, "--out", out) == 0
    header, rows = read_csv(out)
    assert header == ["q0", "ratio_A", "alpha", "dim_H", "dim_P", "gap", "regime"]
    assert len(rows) == 22
    star = exceptional_q0(2, 1, np.log(2) / np.log(3))
    gaps = {float(r[0]): float(r[5]) for r in rows}
    assert gaps[min(gaps, key=lambda q: abs(q - star))] > 4e-3
    assert sum(g > 0 for g in gaps.values()) == 1


def test_scan_without_exceptional_row(cfg, tmp_path):
    out = tmp_path / "scan.csv"
    argv = ["scan-q0", "--config", cfg, "--alpha", 1.0, "--q0-min", 0.35, "--q0-max", 0.45, "--steps", 5]
    assert run(*argv, "--no-exceptional-row", "--out", out) == 0
    assert len(read_csv(out)[1]) == 5


def test_conditions(tmp_path, capsys):
    path = tmp_path / "full.txt"
    path.write_text("m = 2\nn = 4\ndigits = 0,0;0,1;0,2;0,3;1,0;1,1;1,2;1,3\np = uniform\n")
    out = tmp_path / "cond.csv"
    assert run("conditions", "--config", path, "--out", out) == 0
    text = capsys.readouterr().out
    assert "classification = full_at_alpha0" in text
    assert "alpha0 = 2" in text
    assert read_csv(out)[0] == ["key", "value"]


def test_sample_digits_and_points(cfg, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("sample", "--config", cfg, "--length", 50, "--count", 3, "--seed", 7, "--out", a) == 0
    assert run("sample", "--config", cfg, "--length", 50, "--count", 3, "--seed", 7, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()
    header, rows = read_csv(a)
    assert header == ["sample", "position", "row", "col"] and len(rows) == 150
    pts = tmp_path / "p.csv"
    assert run("sample", "--config", cfg, "--points", "--count", 4, "--out", pts) == 0
    header, rows = read_csv(pts)
    assert header == ["sample", "x", "y"]
    assert all(0 <= float(r[1]) <= 1 and 0 <= float(r[2]) <= 1 for r in rows)


def test_sample_nu_delta(cfg, tmp_path):
    out = tmp_path / "nu.csv"
    assert run("sample", "--config", cfg, "--delta", 0.05, "--alpha", 1.0, "--length", 100, "--out", out) == 0
    assert run("sample", "--config", cfg, "--delta", 0.05, "--out", out) == 2


def test_sample_explicit_config(tmp_path):
    path = tmp_path / "e.txt"
    path.write_text(EXPLICIT)
    out = tmp_path / "s.csv"
    assert run("sample", "--config", path, "--length", 20, "--out", out) == 0
    pairs = {(r[2], r[3]) for r in read_csv(out)[1]}
    assert pairs <= {("0", "0"), ("0", "1"), ("1", "0")}


def test_render(cfg, tmp_path):
    out = tmp_path / "c.pgm"
    assert run("render", "--config", cfg, "--size", 64, "--out", out) == 0
    data = out.read_bytes()
    assert data.startswith(b"P5\n64 64\n255\n")
    pix = np.frombuffer(data[len(b"P5\n64 64\n255\n") :], dtype=np.uint8)
    assert pix.size == 64 * 64
    assert set(np.unique(pix)) <= {0, 255}
    assert 0 < np.count_nonzero(pix == 0) < pix.size


def test_verify_suite(cfg, tmp_path, capsys):
    out = tmp_path / "v.csv"
    assert run("verify", "--config", cfg, "--suite", "identities", "--seed", 7, "--out", out) == 0
    text = capsys.readouterr().out
    assert "criterion 1: PASS" in text and "overall: PASS" in text
    header, rows = read_csv(out)
    assert header[:3] == ["criterion", "check", "passed"]
    assert all(r[2] == "1" for r in rows)


@pytest.mark.parametrize(
    "argv",
    [
        ["spectrum", "--out", "x.csv"],
        ["spectrum", "--config", "{cfg}", "--bogus", "--out", "x.csv"],
        ["spectrum", "--config", "{cfg}", "--seed", str(2**64), "--out", "x.csv"],
        ["spectrum", "--config", "{cfg}", "--alpha", "7", "--out", "x.csv"],
        ["spectrum", "--config", "{cfg}", "--threads", "-1", "--out", "x.csv"],
        ["scan-q0", "--config", "{cfg}", "--alpha", "1", "--q0-min", "0.5", "--q0-max", "0.4", "--out", "x.csv"],
        ["spectrum", "--config", "/nonexistent/c.txt", "--out", "x.csv"],
        ["spectrum", "--config", "{cfg}", "--out", "/nonexistent/dir/x.csv"],
        ["render", "--config", "{cfg}", "--size", "0", "--out", "x.pgm"],
        ["nonsense"],
    ],
)
def test_errors_exit_two_with_one_line(argv, cfg, tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert cli.run([a.replace("{cfg}", cfg) for a in argv]) == 2
    err = capsys.readouterr().err
    assert err.startswith("bmcarpet: error:") and err.count("\n") == 1
    assert not [p for p in os.listdir(tmp_path) if p != "c.txt"]


def test_failed_run_leaves_existing_output_untouched(cfg, tmp_path):
    out = tmp_path / "keep.csv"
    out.write_bytes(b"old\n")
    assert run("spectrum", "--config", cfg, "--alpha", 9.0, "--out", out) == 2
    assert out.read_bytes() == b"old\n"
    assert sorted(os.listdir(tmp_path)) == ["c.txt", "keep.csv"]


def test_module_entry_point(cfg, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "bmcarpet", "conditions", "--config", cfg], capture_output=True, text=True
    )
    assert proc.returncode == 0 and proc.stdout.startswith("classification = ")
    proc = subprocess.run([sys.executable, "-m", "bmcarpet", "spectrum"], capture_output=True, text=True)
    assert proc.returncode == 2


# -- config parsing -------------------------------------------------------------


def test_parse_shorthand():
    c = parse_config_text(EXCEPTIONAL)
    assert c.is_two_row and (c.m, c.n, c.n0, c.n1) == (2, 3, 2, 1)
    assert c.q0 == pytest.approx(0.392378032758, abs=1e-12)


def test_parse_explicit():
    c = parse_config_text(EXPLICIT)
    assert c.digits == ((0, 0), (0, 1), (1, 0))
    tr = c.two_row()
    assert (tr.n0, tr.n1, tr.q0) == (2, 1, pytest.approx(0.4))


@pytest.mark.parametrize(
    "text,match",
    [
        ("m = 2\nn = 3\n", "exactly one"),
        ("m = 2\n" + "n0 = 2\nn1 = 1\nq0 = 0.3\n", "missing required key 'n'"),
        (EXCEPTIONAL + "colour = red\n", "unknown key"),
        (EXCEPTIONAL + "m = 3\n", "duplicate"),
        (EXCEPTIONAL + "digits = 0,0\n", "exactly one"),
        ("m = 2\nn = 3\nn0 = 2\nq0 = 0.3\n", "missing n1"),
        ("m = 2\nn = 3\ndigits = 0,0; 1,0\np = 0.5\n", "entries"),
        ("m = 2\nn = 3\ndigits = 0,0; 1\np = uniform\n", "pairs"),
        ("m = 2\nn = 3\nn0 = 2\nn1 = 1\nq0 = 1.0\n", "q0"),
        ("m = 2\nn = 3\nn0 = 2\nn1 = 1\nq0 = nan\n", "finite"),
        ("m = two\nn = 3\nn0 = 2\nn1 = 1\nq0 = 0.3\n", "integer"),
        ("m = 2\nn = 3\nwhat\n", "key = value"),
    ],
)
def test_config_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config_text(text)


def test_non_two_row_config_rejected_for_spectrum(tmp_path, capsys):
    path = tmp_path / "x.txt"
    path.write_text("m = 2\nn = 3\ndigits = 0,0; 0,1; 1,0\np = 0.1, 0.3, 0.6\n")
    assert run("spectrum", "--config", path, "--alpha-steps", 3, "--out", tmp_path / "o.csv") == 2
    assert "two-row" in capsys.readouterr().err
