import csv
import json

import numpy as np
import pytest

from wtfbf import besov as bv
from wtfbf import hyperbolic as hy
from wtfbf import io
from wtfbf.cli import main
from wtfbf.model import FieldParams, coeff_constant_c1, coeff_variance_exact


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def _json_lines(out):
    return [json.loads(ln) for ln in out.splitlines() if ln.strip()]


def test_simulate_cholesky_axes_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.wtfb", tmp_path / "b.wtfb"
    for p in (a, b):
        code, out, _ = run(capsys, "simulate", "--alpha", 0.5, "--hurst", 0.5, "--size", 64,
                           "--method", "cholesky", "--seed", 42, "--out", p)
        assert code == 0
    assert io.sha256_file(a) == io.sha256_file(b)
    f = io.read_grid(a)
    assert f.values.shape == (64, 64)
    assert np.all(f.values[0] == 0) and np.all(f.values[:, 0] == 0)
    m = json.loads((tmp_path / "a.wtfb.manifest.json").read_text())
    assert m["outputs"][str(a)] == io.sha256_file(a) and m["seed"] == 42


def test_simulate_validation(tmp_path, capsys):
    code, _, err = run(capsys, "simulate", "--alpha", 0.5, "--hurst", 1.5, "--size", 8,
                       "--out", tmp_path / "x")
    assert code == 2 and "hurst" in err.lower()
    code, _, err = run(capsys, "simulate", "--alpha", 0.5, "--hurst", 0.5, "--size", 65,
                       "--method", "cholesky", "--out", tmp_path / "x")
    assert code == 2 and "4096" in err
    code, _, err = run(capsys, "simulate", "--alpha", 0.5, "--hurst", 0.5, "--size", 8,
                       "--extent", 0, "--out", tmp_path / "x")
    assert code == 2


def test_analyze_round_trip_and_summary(tmp_path, capsys):
    g = tmp_path / "f.wtfb"
    run(capsys, "simulate", "--alpha", 0.5, "--hurst", 0.5, "--size", 64, "--seed", 3, "--out", g)
    for name in ("c.jsonl", "c.bin"):
        out = tmp_path / name
        code, _, _ = run(capsys, "analyze", "--in", g, "--levels", 4, "--out", out)
        assert code == 0
        c = io.read_coeffs(out)
        ref = hy.analyze(io.read_grid(g), 4, margin=hy.ANALYSIS_MARGIN)
        assert all(c[jb].tobytes() == ref[jb].tobytes() for jb in ref.levels())
    rows = list(csv.DictReader(open(str(out) + ".levels.csv")))
    means = hy.member_level_means(ref)
    for r in rows:
        jb = (int(r["j1"]), int(r["j2"]))
        if jb in means:
            assert float(r["mean_sq"]) == pytest.approx(means[jb], rel=1e-12)
    code, _, err = run(capsys, "analyze", "--in", g, "--levels", 9, "--out", tmp_path / "d.bin")
    assert code == 2 and "level" in err


def test_analyze_corrupt_file(tmp_path, capsys):
    bad = tmp_path / "bad.wtfb"
    bad.write_bytes(b"WTFB" + b"\x07" + bytes(80))
    code, _, err = run(capsys, "analyze", "--in", bad, "--levels", 2, "--out", tmp_path / "o.bin")
    assert code == 2 and "version" in err


def test_estimate_errors_and_point_only(tmp_path, capsys):
    code, _, err = run(capsys, "estimate", "--in", str(tmp_path / "none*.bin"))
    assert code == 2 and "no coefficient files" in err
    g, c = tmp_path / "f.wtfb", tmp_path / "c.bin"
    run(capsys, "simulate", "--alpha", 0.5, "--hurst", 0.5, "--size", 256, "--extent", 4,
        "--band-limit", "--seed", 1, "--out", g)
    run(capsys, "analyze", "--in", g, "--levels", 4, "--out", c)
    code, out, _ = run(capsys, "estimate", "--in", c, "--bootstrap", 0)
    rep = json.loads(out)
    assert code == 0 and "hurst" in rep and "hurst_ci" not in rep
    code, _, err = run(capsys, "estimate", "--in", c, "--bootstrap", 200)
    assert code == 2 and "members" in err


def test_oracle_examples(capsys):
    code, out, _ = run(capsys, "oracle", "--what", "increment-variance", "--alpha", 0,
                       "--hurst", 0.5, "--h", 1, 1)
    v = json.loads(out)
    assert code == 0 and v["value"] == pytest.approx(4 * np.pi ** 2, rel=1e-5)
    code, out, _ = run(capsys, "oracle", "--what", "variance", "--alpha", 0.3, "--hurst", 0.6,
                       "--x", 0, 0.7)
    assert json.loads(out)["value"] == 0.0
    code, out, _ = run(capsys, "oracle", "--what", "coeff-variance", "--alpha", 0.5,
                       "--hurst", 0.5, "--j", 5, 2)
    p = FieldParams(0.5, 0.5)
    want = coeff_constant_c1(p) * 2.0 ** (-2 * 0.75 * 5 - 2 * 0.25 * 2)
    assert json.loads(out)["value"] == pytest.approx(want, rel=1e-4)
    code, _, err = run(capsys, "oracle", "--what", "variance", "--alpha", 2, "--hurst", 0.5,
                       "--x", 1, 1)
    assert code == 2 and "alpha" in err


def test_besov_norm_command(tmp_path, capsys):
    c = hy.zero_coeffs(io.GridSpec.square(64, 1.0), 3)
    c.blocks[(2, 1)][0, 0] = 8.0
    path = tmp_path / "c.bin"
    io.write_coeffs(path, c)
    code, out, _ = run(capsys, "besov-norm", "--in", path, "--s", 0.5, "--alpha", 1)
    rep = json.loads(out)
    assert code == 0 and rep["sequence_norm"] == 2.0 and rep["q_is_inf"]


def test_verify_besov_and_unknown_suite(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "besov")
    lines = _json_lines(out)
    assert code == 0 and lines[-1]["summary"]["fail"] == 0 and lines[-1]["summary"]["pass"] >= 5
    code, _, _ = run(capsys, "verify", "--suite", "bogus")
    assert code == 2


def test_verify_budget_skips(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "all", "--budget", 0)
    lines = _json_lines(out)
    assert code == 0 and lines[-1]["summary"]["skipped"] >= 1


def test_replay_reproduces_output(tmp_path, capsys):
    a = tmp_path / "a.wtfb"
    run(capsys, "simulate", "--alpha", 0.2, "--hurst", 0.7, "--size", 16, "--seed", 9, "--out", a)
    digest = io.sha256_file(a)
    a.unlink()
    code, _, _ = run(capsys, "replay", str(a) + ".manifest.json")
    assert code == 0 and io.sha256_file(a) == digest
