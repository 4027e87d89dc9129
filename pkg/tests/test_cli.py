import math
import shutil
import subprocess
import sys

import pytest
import yaml

from flexlab.cli import main
from flexlab.io import bundled


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def _tampered(tmp_path, **points):
    doc = yaml.safe_load(bundled("hexagonal_suspension.yaml").read_text())
    doc["basepoints"].update(points)
    path = tmp_path / "tampered.yaml"
    path.write_text(yaml.safe_dump(doc))
    return path


# ---------------------------------------------------------------------------
# validate


def test_validate_tetrahedron(capsys):
    code, out, _ = run(capsys, "validate", bundled("tetrahedron.yaml"))
    assert code == 0
    assert "pseudo-manifold: PASS" in out
    assert "membership" in out and "FAIL" not in out


def test_validate_three_incident_edge(capsys):
    code, out, _ = run(capsys, "validate", bundled("bad_edge.yaml"))
    assert code == 1
    assert "pseudo-manifold: FAIL" in out
    assert "condition (2)" in out


def test_validate_suspension_snapshot(capsys):
    code, out, _ = run(capsys, "validate", bundled("suspension_x75.yaml"))
    assert code == 0, out


def test_validate_parse_error_exit_2(tmp_path, capsys):
    path = tmp_path / "broken.yaml"
    path.write_text("vertices: [\n")
    code, _, err = run(capsys, "validate", path)
    assert code == 2
    assert "line" in err and "column" in err


def test_validate_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "validate", tmp_path / "missing.yaml")
    assert code == 2


# ---------------------------------------------------------------------------
# build


def test_build_summary(capsys):
    code, out, _ = run(capsys, "build", "bundled")
    assert code == 0
    assert "conditions (A)-(D): PASS" in out
    assert "sigma1 = -1, sigma2 = +1, sigma3 = +1, sigma4 = +1, sigma5 = +1, sigma6 = -1" in out
    assert "exact edge lengths:" in out
    assert "radicands: 1, 2, 15, 30, 85, 102, 170" in out


def test_build_snapshot_accepted_by_validate(tmp_path, capsys):
    snap = tmp_path / "snap.yaml"
    code, out, _ = run(capsys, "build", "bundled", "--at", 75, "--out", snap)
    assert code == 0 and snap.is_file()
    code, out, _ = run(capsys, "validate", snap)
    assert code == 0, out
    # identical to the bundled snapshot
    assert snap.read_text().split("\n", 1)[1] == bundled("suspension_x75.yaml").read_text().split("\n", 1)[1]


def test_build_snapshot_grid(tmp_path, capsys):
    code, out, _ = run(capsys, "build", "bundled", "--snapshot-grid", 3, "--out", tmp_path / "grid")
    assert code == 0
    files = sorted((tmp_path / "grid").glob("*.yaml"))
    assert len(files) == 3
    for f in files:
        assert run(capsys, "validate", f)[0] == 0


def test_build_off_curve_basepoint(tmp_path, capsys):
    code, out, _ = run(capsys, "build", _tampered(tmp_path, B=["1", "1"]))
    assert code == 1
    assert "basepoint B" in out


def test_build_tampered_c_off_curve(tmp_path, capsys):
    code, out, _ = run(capsys, "build", _tampered(tmp_path, C=["102", "103"]))
    assert code == 1
    assert "build failed" in out


def test_build_mirrored_c_is_another_valid_suspension(tmp_path, capsys):
    # (102, 102) is the mirror of C; the words are linear so every pair of
    # points is mirrored together and (A)-(D) still hold
    code, out, _ = run(capsys, "build", _tampered(tmp_path, C=["102", "102"]))
    assert code == 0
    assert "conditions (A)-(D): PASS" in out


def test_build_condition_failure_certificate(tmp_path, capsys):
    doc = yaml.safe_load(bundled("hexagonal_suspension.yaml").read_text())
    doc["points"]["Q1minus"] = {k: -v for k, v in doc["points"]["Q1minus"].items()}
    path = tmp_path / "flipped.yaml"
    path.write_text(yaml.safe_dump(doc))
    code, out, _ = run(capsys, "build", path)
    assert code == 1
    assert "condition (B) failed (j = 1)" in out
    assert "offending point" in out


# ---------------------------------------------------------------------------
# sweep


def test_sweep_pass_and_csv(tmp_path, capsys):
    csv = tmp_path / "sweep.csv"
    code, out, _ = run(capsys, "sweep", "bundled", "--from", 51.5, "--to", 99.5, "--steps", 100, "--out", csv)
    assert code == 0
    assert "verdict: PASS" in out
    lines = csv.read_bytes().split(b"\r\n")
    assert lines[0].startswith(b"t,volume,schlafli_residual,phi_N_p1")
    assert lines[0].endswith(b"alpha_sqrt170")
    assert len([ln for ln in lines if ln]) == 101


def test_sweep_csv_deterministic(tmp_path, capsys):
    paths = [tmp_path / f"s{i}.csv" for i in range(3)]
    for path, jobs in zip(paths, (1, 1, 3)):
        assert run(capsys, "sweep", "bundled", "--steps", 12, "--jobs", jobs, "--out", path)[0] == 0
    data = [p.read_bytes() for p in paths]
    assert data[0] == data[1] == data[2]


def test_sweep_too_few_steps(capsys):
    with pytest.raises(SystemExit) as info:
        main(["sweep", "bundled", "--steps", "2"])
    assert info.value.code == 2
    assert "at least 3" in capsys.readouterr().err


def test_sweep_range_touching_endpoint(capsys):
    code, _, err = run(capsys, "sweep", "bundled", "--from", 51.0, "--to", 60, "--steps", 5)
    assert code == 2
    assert "open interval" in err


def test_sweep_tight_tolerance_fails(capsys):
    code, out, _ = run(capsys, "sweep", "bundled", "--steps", 5, "--tol-dehn", 1e-20)
    assert code == 1
    assert "verdict: FAIL" in out


# ---------------------------------------------------------------------------
# dehn / rigidity / volume


def test_dehn_cube(capsys):
    code, out, _ = run(capsys, "dehn", bundled("cube.yaml"))
    assert code == 0
    assert "0 (all terms = 0 mod pi*Q)" in out


def test_dehn_tetrahedron(capsys):
    code, out, _ = run(capsys, "dehn", bundled("tetrahedron.yaml"))
    assert code == 0
    line = next(ln for ln in out.splitlines() if "->" in ln)
    assert line.split("(")[0].split() == ["1", "->", "6*arccos"]
    assert "6*arccos(1/3)" in line
    assert float(line.rsplit("(", 1)[1].rstrip(")")) == pytest.approx(6 * math.acos(1 / 3), abs=1e-12)


def test_dehn_suspension_table(capsys):
    code, out, _ = run(capsys, "dehn", bundled("suspension_x75.yaml"))
    assert code == 0
    rows = [ln.split()[0] for ln in out.splitlines() if "->" in ln]
    assert rows == ["1", "2", "15", "30", "85", "102", "170"]


def test_dehn_raw(capsys):
    code, out, _ = run(capsys, "dehn", bundled("tetrahedron.yaml"), "--raw")
    assert code == 0
    assert "raw terms" in out
    assert out.count("(x)") == 6


def test_dehn_rejects_invalid_complex(capsys):
    code, _, err = run(capsys, "dehn", bundled("bad_edge.yaml"))
    assert code == 1
    assert "check failed" in err


def test_rigidity(capsys):
    code, out, _ = run(capsys, "rigidity", bundled("tetrahedron.yaml"))
    assert code == 0
    assert "nontrivial flex dimension: 0" in out
    code, out, _ = run(capsys, "rigidity", bundled("suspension_x75.yaml"))
    assert code == 0
    line = next(ln for ln in out.splitlines() if ln.startswith("nontrivial flex dimension"))
    assert int(line.split(":")[1]) >= 1


def test_volume(capsys):
    code, out, _ = run(capsys, "volume", bundled("unit_tetrahedron.yaml"))
    assert code == 0
    assert float(out.split(":")[1]) == pytest.approx(1 / 6, abs=1e-15)


def test_volume_monte_carlo(capsys, monkeypatch):
    monkeypatch.setenv("FLEXLAB_SEED", "7")
    first = run(capsys, "volume", bundled("unit_tetrahedron.yaml"), "--monte-carlo", 20000)
    second = run(capsys, "volume", bundled("unit_tetrahedron.yaml"), "--monte-carlo", 20000)
    assert first[0] == 0
    assert "within 3 standard errors: PASS" in first[1]
    assert first[1] == second[1]
    third = run(capsys, "volume", bundled("unit_tetrahedron.yaml"), "--monte-carlo", 20000, "--seed", 8)
    assert third[1] != first[1]


def test_console_script():
    exe = shutil.which("flexlab")
    cmd = [exe] if exe else [sys.executable, "-m", "flexlab"]
    proc = subprocess.run(cmd + ["validate", str(bundled("tetrahedron.yaml"))],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    proc = subprocess.run([sys.executable, "-m", "flexlab", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "sweep" in proc.stdout
