import json
import subprocess
import sys

import numpy as np
import pytest

from reebcurves.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def footer(text):
    last = text.strip().split("\n")[-1]
    assert last.startswith("# ")
    return json.loads(last[2:])


def test_verify_exit_codes(capsys):
    code, out, _ = run(capsys, "verify", "--model", "s3", "--points", "20", "--seed", "7")
    assert code == 0 and json.loads(out)["pass"]
    code, out, _ = run(capsys, "verify", "--model", "flat-control", "--points", "5")
    rec = json.loads(out)
    assert code == 1 and "sasakian" in rec["failed_checks"]
    assert rec["checks"]["sasakian"]["max_residual"]["nabla_phi"] >= 0.5
    code, _, err = run(capsys, "verify", "--model", "nope")
    assert code == 2 and "unknown model" in err


def test_verify_tolerance_override(capsys):
    code, _, _ = run(capsys, "verify", "--model", "r3", "--points", "3", "--tol-structure", "1e-30")
    assert code == 1


def test_verify_is_reproducible(capsys, tmp_path):
    for d in ("a", "b"):
        run(capsys, "verify", "--model", "r3", "--points", "5", "--seed", "3",
            "--out", str(tmp_path / d))
    assert (tmp_path / "a" / "verify.json").read_text().replace("/a", "/b") == \
        (tmp_path / "b" / "verify.json").read_text()


def test_analyze_clifford_preset(capsys, tmp_path):
    code, out, _ = run(capsys, "analyze", "--curve", "clifford", "--points", "11",
                       "--out", str(tmp_path))
    assert code == 0
    rec = footer(out)
    assert rec["verdict"]["status"] == "pass"
    lines = (tmp_path / "series.csv").read_text().strip().split("\n")
    assert lines[0] == "s,chi1,chi2,chi3,tau2_norm,route_gap,eta_T,n1_defect"
    assert all(float(line.split(",")[4]) < 1e-6 for line in lines[1:])
    assert json.loads((tmp_path / "analysis.json").read_text())["verdict"]["pass"]


@pytest.mark.parametrize("model", ["s3", "r3"])
def test_analyze_geodesic_preset(capsys, model):
    code, out, _ = run(capsys, "analyze", "--model", model, "--curve", "geodesic", "--points", "5")
    rec = footer(out)
    assert code == 0
    assert rec["verdict"]["status"] == "geodesic"
    assert rec["verdict"]["message"] == "geodesic: theorem inapplicable"
    assert rec["tangent_case"]["vacuous"]


def test_analyze_random_curve_fails_characterization(capsys):
    code, out, _ = run(capsys, "analyze", "--model", "r3", "--curve", "random", "--points", "5")
    assert code == 1 and footer(out)["verdict"]["status"] == "fail"


def test_analyze_coarse_csv_warns(capsys, tmp_path):
    s = np.linspace(0, 2, 9)
    path = tmp_path / "coarse.csv"
    path.write_text("s,c1,c2,c3\n" + "".join(
        f"{t:.17g},{np.cos(t):.17g},{np.sin(t):.17g},{0.3 * t:.17g}\n" for t in s))
    code, out, err = run(capsys, "analyze", "--model", "r3", "--curve", str(path))
    assert code == 0
    assert "derivative order" in err
    row = out.split("\n")[1].split(",")
    assert row[1] != "" and row[4] == ""  # chi1 present, tau2 blank


def test_analyze_malformed_csv(capsys, tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("s,c1,c2,c3\n0,1,2,3\n0.1,1,2\n")
    code, _, err = run(capsys, "analyze", "--model", "r3", "--curve", str(path))
    assert code == 2 and "line 3" in err
    code, _, err = run(capsys, "analyze", "--curve", str(tmp_path / "missing.csv"))
    assert code == 2


def test_scan_writes_outputs(capsys, tmp_path):
    args = ["scan", "--n", "3", "--m", "3", "--chi1-min", "0.6", "--chi1-max", "1.0",
            "--chi2-min", "0.0", "--chi2-max", "0.8", "--length", "2", "--seed", "4"]
    assert run(capsys, *args, "--out", str(tmp_path / "a"))[0] == 0
    assert run(capsys, *args, "--out", str(tmp_path / "b"), "--jobs", "2")[0] == 0
    a = (tmp_path / "a" / "scan.csv").read_bytes()
    assert a == (tmp_path / "b" / "scan.csv").read_bytes()
    assert a.decode().split("\n")[1].endswith(",4")
    summary = json.loads((tmp_path / "a" / "scan.json").read_text())
    assert {(c["chi1"], c["chi2"]) for c in summary["locus_cells"]} == {(0.6, 0.8), (1.0, 0.0)}


def test_scan_rejects_nonpositive_chi1(capsys, tmp_path):
    code, _, err = run(capsys, "scan", "--chi1-min", "-0.1", "--out", str(tmp_path))
    assert code == 2 and "chi1" in err


def test_find_on_locus(capsys):
    code, out, _ = run(capsys, "find", "--chi1", "0.6", "--chi2", "0.8")
    rec = json.loads(out)
    assert code == 0 and rec["iterations"] == 0 and rec["residual"] < 1e-6
    assert run(capsys, "find", "--chi1", "0")[0] == 2


def test_usage_errors_exit_two():
    r = subprocess.run([sys.executable, "-m", "reebcurves", "frobnicate"], capture_output=True)
    assert r.returncode == 2
    r = subprocess.run([sys.executable, "-m", "reebcurves", "verify", "--model", "r3",
                        "--points", "2"], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["pass"]
