import csv
import io
import json
import shutil
import subprocess

import pytest

from reslab.cli import main


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out.read_text() if out.exists() else None


def test_no_command_is_usage_error(capsys):
    assert main([]) == 1
    assert "command is required" in capsys.readouterr().err


def test_unknown_flag_is_usage_error():
    assert main(["airy-zeros", "--bogus"]) == 1


def test_airy_zeros_csv(tmp_path):
    code, text = run(tmp_path, "airy-zeros", "--j-max", "10")
    assert code == 0
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["j", "zeta_j", "zeta_prime_j", "e_j_0", "norm_j", "asymptotic_ratio"]
    assert len(rows) == 11
    zeta = [float(r[1]) for r in rows[1:]]
    zeta_p = [float(r[2]) for r in rows[1:]]
    assert all(zeta_p[j] < zeta[j] < zeta_p[j + 1] for j in range(9))


def test_airy_zeros_json_ratio(tmp_path):
    code, text = run(tmp_path, "airy-zeros", "--j-max", "200", "--format", "json")
    assert code == 0
    rows = json.loads(text)
    assert len(rows) == 200
    assert all(abs(r["asymptotic_ratio"] - 1) < 0.01 for r in rows[50:])


@pytest.mark.parametrize("j", ["0", "501", "x"])
def test_airy_zeros_bad_size(tmp_path, j):
    assert main(["airy-zeros", "--j-max", j]) == 1


def test_bands_sphere(tmp_path):
    code, text = run(tmp_path, "bands")
    assert code == 0
    doc = json.loads(text)
    c = doc["constants"]
    assert c["kappa"] == c["K_const"]
    assert c["j0"] == 199


def test_bands_ellipsoid_csv(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"obstacle": {"kind": "ellipsoid", "semi_axes": [1.2, 1.0, 1.0]}}))
    code, text = run(tmp_path, "bands", "--config", str(cfg), "--format", "csv", "--bands", "2", name="b.csv")
    assert code == 0
    assert text.splitlines()[0] == "Re_lambda,band_1_lower,band_1_upper,band_2_lower,band_2_upper"
    consts = json.loads((tmp_path / "b.csv.constants.json").read_text())
    assert consts["j0"] >= 1


def test_bands_explicit_and_non_convex(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kind": "explicit", "Qmin": 1, "Qmax": 6}))
    code, text = run(tmp_path, "bands", "--config", str(cfg))
    assert code == 0 and json.loads(text)["constants"]["j0"] == 0
    cfg.write_text(json.dumps({"kind": "explicit", "Qmin": -1, "Qmax": 6}))
    assert main(["bands", "--config", str(cfg)]) == 1


def test_malformed_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{not json")
    assert main(["bands", "--config", str(cfg)]) == 1
    assert main(["bands", "--config", str(tmp_path / "missing.json")]) == 1


def test_sphere_neumann_small(tmp_path):
    code, text = run(tmp_path, "sphere-resonances", "--bc", "neumann", "--l-max", "5")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(text)))
    counts = [sum(int(r["l"]) == l for r in rows) for l in range(6)]
    assert counts == [1, 2, 3, 4, 5, 6]
    first = rows[0]
    assert first["l"] == "0"
    assert abs(float(first["re_lambda"])) < 1e-12 and abs(float(first["im_lambda"]) + 1) < 1e-12


def test_sphere_bad_bc(tmp_path):
    assert main(["sphere-resonances", "--bc", "periodic"]) == 1
    assert main(["sphere-resonances", "--l-max", "999"]) == 1


def test_sphere_then_weyl_round_trip(tmp_path):
    code, _ = run(tmp_path, "sphere-resonances", "--l-max", "30", name="rec.csv")
    assert code == 0
    code, text = run(tmp_path, "weyl", str(tmp_path / "rec.csv"), "--r", "15", "--j", "1", name="w.json")
    assert code == 0
    w = json.loads(text)
    assert w["predicted"] == pytest.approx(225.0)
    assert 0.8 < w["ratio"] < 1.3
    # too large an r for the records
    assert main(["weyl", str(tmp_path / "rec.csv"), "--r", "100"]) == 1


def test_weyl_empty_file(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    code, text = run(tmp_path, "weyl", str(empty), "--r", "10")
    assert code == 0
    assert json.loads(text)["count"] == 0


def test_deterministic_outputs(tmp_path):
    a = run(tmp_path, "sphere-resonances", "--l-max", "12", "--seed", "4", name="a")[1]
    b = run(tmp_path, "sphere-resonances", "--l-max", "12", "--seed", "4", name="b")[1]
    assert a == b
    a = run(tmp_path, "bands", name="c")[1]
    b = run(tmp_path, "bands", name="d")[1]
    assert a == b


def test_grushin_demo(tmp_path):
    code, text = run(tmp_path, "grushin-demo", "--seed", "1")
    assert code == 0
    doc = json.loads(text)
    assert doc["pass"] is True
    assert doc["lambda_sweep"] == [0.0, 10.0, 40.0, 160.0]
    assert doc["slope"] < 0.1
    code2, text2 = run(tmp_path, "grushin-demo", "--seed", "1", name="again")
    assert text2 == text


def test_grushin_demo_bad_parameters(tmp_path):
    assert main(["grushin-demo", "--trials", "10"]) == 1
    assert main(["grushin-demo", "--mu", "50"]) == 1


@pytest.mark.skipif(shutil.which("reslab") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["reslab", "airy-zeros", "--j-max", "3"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.count("\n") == 4
