"""Command-line interface: outputs, manifests and exit statuses."""

import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from rgevt.cli import OUTPUT_DIR_ENV, main, parse_and_dispatch


def run(*argv):
    return parse_and_dispatch([str(a) for a in argv])


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_classify_tent_json(capsys):
    assert main(["classify", "--dist", "tent"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["converges"] is True
    assert abs(payload["alpha"] - 2) < 1e-3
    assert abs(payload["lambda"] - 2) < 2e-4
    assert payload["diagnostics"]


def test_transform_uniform_case2_is_identity(tmp_path):
    out = tmp_path / "t.csv"
    status, payload = run("transform", "--dist", "uniform", "--group", "case2:alpha=1",
                          "--n", 1000, "--grid", "0.01:1:50", "--out", out)
    assert status == 0
    header, data = read_csv(out)
    assert header == ["x", "cdf", "pdf"]
    assert np.allclose(data[:, 1], data[:, 0], rtol=1e-12)
    assert np.allclose(data[:, 2], 1.0, rtol=1e-9)
    manifest = json.loads((tmp_path / "t.csv.manifest.json").read_text())
    assert manifest["subcommand"] == "transform"
    assert manifest["parameters"]["n"] == 1000
    assert "tool_version" in manifest and "timestamp" in manifest


def test_expand_valley_terms():
    status, payload = run("expand", "--dist", "valley", "--max-order", 4)
    assert status == 0
    terms = {round(t["beta"], 9): t["c"] for t in payload["terms"]}
    assert terms[2.0] == pytest.approx(1.0, abs=1e-6)
    assert terms[3.0] == pytest.approx(1.0, abs=1e-6)
    assert terms[4.0] == pytest.approx(7 / 12, abs=1e-6)
    assert payload["fixed_point"]["alpha"] == 1


def test_predict_valley_columns(tmp_path):
    out = tmp_path / "p.csv"
    status, payload = run("predict", "--dist", "valley", "--order", 3, "--out", out)
    assert status == 0
    header, data = read_csv(out)
    assert header == ["n", "delta_pred", "scaled_1", "scaled_2", "scaled_3"]
    c = [a["c"] for a in payload["amplitude"]]
    assert c[0] == pytest.approx(2 * math.exp(-2), abs=1e-9)
    assert c[1] == pytest.approx(3 * math.exp(-2), abs=1e-8)
    assert c[2] == pytest.approx(4.5 * math.exp(-2), abs=1e-6)
    # the scaled remainders settle on the coefficients as n grows
    assert data[-1, 2] == pytest.approx(c[0], rel=1e-4)
    assert data[-1, 4] == pytest.approx(c[2], rel=1e-2)


def test_predict_frozen_method_and_shape(tmp_path):
    out = tmp_path / "p.csv"
    status, payload = run("predict", "--dist", "valley", "--order", 3, "--amplitude-method", "frozen",
                          "--n", 300, "--x-grid", "0:1:20001", "--out", out)
    assert status == 0
    assert payload["amplitude"][2]["c"] == pytest.approx(2.5 * math.exp(-2), abs=1e-6)
    header, data = read_csv(payload["shape_output"])
    assert header[:2] == ["x", "delta_pred"]
    # every correction shape integrates to zero
    for j in range(2, len(header)):
        assert abs(np.trapezoid(data[:, j], data[:, 0])) < 1e-3


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "outdir"))
    status, payload = run("transform", "--dist", "tent", "--group", "case2:alpha=2", "--n", 10)
    assert status == 0
    assert (tmp_path / "outdir" / "transform.csv").exists()
    assert (tmp_path / "outdir" / "transform.csv.manifest.json").exists()


def test_simulate_compare_round_trip(tmp_path):
    out = tmp_path / "sim.csv"
    status, payload = run("simulate", "--dist", "tent", "--n", 100, "--replicas", 50_000,
                          "--seed", 3, "--group", "auto", "--out", out)
    assert status == 0 and payload["replicas"] == 50_000
    manifest = json.loads((tmp_path / "sim.csv.manifest.json").read_text())
    assert manifest["seed"] == 3
    cmp_out = tmp_path / "cmp.csv"
    status, payload = run("compare", "--result", out, "--prediction", "exact", "--out", cmp_out)
    assert status == 0
    header, data = read_csv(cmp_out)
    assert header == ["bin_mid", "observed", "predicted", "scaled_residual", "z"]
    assert data.shape == (50, 5)
    assert 0.6 < payload["mean_z2"] < 1.6
    status, payload = run("compare", "--result", out, "--prediction", "perturbative:1",
                          "--scale-exponent", 0.5, "--out", cmp_out)
    assert status == 0


def test_simulate_is_worker_independent(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    common = ["simulate", "--dist", "valley", "--n", 30, "--replicas", 20_000, "--seed", 5,
              "--chunk-size", 3_000]
    assert run(*common, "--workers", 1, "--out", a)[0] == 0
    assert run(*common, "--workers", 3, "--out", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize("argv, status, code", [
    (["classify", "--dist", "nope"], 5, "unknown-id"),
    (["transform", "--dist", "tent", "--group", "case2:alpha=-1", "--n", 3], 2, None),
    (["simulate", "--dist", "salpeter-mass", "--n", 3, "--replicas", 10, "--seed", 0,
      "--group", "case2:alpha=1"], 4, "support-mismatch"),
    (["predict", "--dist", "salpeter", "--order", 4, "--max-order", 2], 9, None),
    (["classify"], 64, None),
])
def test_error_exit_statuses(argv, status, code):
    got, payload = run(*argv)
    assert got == status
    assert payload["exit_status"] == status
    if code:
        assert payload["error"] == code


def test_errors_go_to_stderr(capsys):
    assert main(["classify", "--dist", "nope"]) == 5
    captured = capsys.readouterr()
    assert captured.out == ""
    assert json.loads(captured.err)["error"] == "unknown-id"


def test_help_lists_identifiers():
    res = subprocess.run([sys.executable, "-m", "rgevt", "simulate", "--help"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    for ident in ("tent", "valley", "salpeter", "salpeter-mass", "uniform", "case2:alpha="):
        assert ident in res.stdout
