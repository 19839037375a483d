import csv
import json
import math

import jsonschema
import pytest

from qdcsim.cli import load_schema, main

PI = math.pi


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_sweep_morphing_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep-morphing", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "phi,theta,intensity"
    assert len(lines) == 1 + 181 * 46
    rows = read_csv(out)
    first = rows[45]
    assert float(first["phi"]) == 0 and float(first["theta"]) == pytest.approx(PI / 4)
    assert float(first["intensity"]) == pytest.approx(1.0, abs=1e-12)
    mid = rows[90 * 46 + 45]
    assert float(mid["phi"]) == pytest.approx(PI)
    assert float(mid["intensity"]) == pytest.approx(0.0, abs=1e-12)
    meta = json.loads((tmp_path / "sweep.csv.meta.json").read_text())
    jsonschema.validate(meta, load_schema("meta.schema.json"))
    assert meta["columns"] == ["phi", "theta", "intensity"]


def test_witness_point_linear(tmp_path):
    out = tmp_path / "w.json"
    assert main(["witness", "--kind", "linear", "--phi", "45", "--theta", "45", "--degrees", "--format", "json", "--out", str(out)]) == 0
    pt = json.loads(out.read_text())["points"][0]
    assert pt["value"] == pytest.approx(1 + 2 * math.sqrt(2), abs=1e-12)
    assert pt["violated"] is True


def test_witness_point_nonlinear_at_zero_theta(tmp_path):
    out = tmp_path / "w.json"
    assert main(["witness", "--kind", "nonlinear", "--phi", "1.0", "--theta", "0", "--format", "json", "--out", str(out)]) == 0
    pt = json.loads(out.read_text())["points"][0]
    assert pt["value"] == 0 and pt["violated"] is False
    assert len(pt["matrix"]) == 2


def test_witness_custom_settings(tmp_path):
    out = tmp_path / "w.json"
    args = ["witness", "--kind", "nonlinear", "--phi", "0", "--theta", "0.6", "--preparations", "0.1,0.9,1.7,2.5,3.3,4.1", "--measurements", "0,1,2", "--format", "json", "--out", str(out)]
    assert main(args) == 0
    pt = json.loads(out.read_text())["points"][0]
    assert len(pt["matrix"]) == 3


def test_witness_grid_violation_contour(tmp_path):
    out = tmp_path / "grid.csv"
    assert main(["witness", "--kind", "linear", "--phi-steps", "73", "--theta-steps", "19", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 73 * 19
    for r in rows:
        phi, theta, value = float(r["phi"]), float(r["theta"]), float(r["value"])
        expected = math.sin(2 * theta) * (2 * (math.cos(phi) + math.sin(phi)) + 1)
        assert value == pytest.approx(expected, abs=1e-12)
        assert (r["violated"] == "true") == (value > 3 + 1e-9)
    assert any(r["violated"] == "true" for r in rows)


def test_witness_point_needs_both_coordinates(capsys):
    assert main(["witness", "--phi", "1.0"]) == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"]["type"] == "usage"


def test_classical_bound(tmp_path):
    out = tmp_path / "cb.json"
    assert main(["classical-bound", "--mixtures", "2000", "--out", str(out)]) == 0
    r = json.loads(out.read_text())
    assert r["linear"]["strategies"] == 128 and r["linear"]["max_value"] == 3.0
    assert r["nonlinear"]["strategies"] == 256 and r["nonlinear"]["max_abs_det"] < 1e-12
    assert r["runtime_s"] is None
    assert r["quantum_classical_gap"] == pytest.approx(2 * math.sqrt(2) - 2)


def test_classical_bound_d1(tmp_path):
    out = tmp_path / "cb1.json"
    assert main(["classical-bound", "--dim", "1", "--mixtures", "100", "--out", str(out)]) == 0
    r = json.loads(out.read_text())
    assert r["linear"]["max_value"] <= 3


def test_bad_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as e:
        main(["witness", "--bogus"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["classical-bound", "--format", "csv"])
    assert e.value.code == 2


def test_entangle_default(tmp_path):
    out = tmp_path / "e.json"
    assert main(["entangle", "--out", str(out)]) == 0
    r = json.loads(out.read_text())
    jsonschema.validate(r, load_schema("entangle.schema.json"))
    assert r["logical_concurrence"] == pytest.approx(1.0, abs=1e-10)
    assert r["physical_concurrence"] == pytest.approx(math.cos(PI / 3) / math.sqrt(2), abs=1e-12)
    assert len(r["amplitudes"]["re"]) == 8


def test_entangle_equal_arms_is_product(tmp_path):
    out = tmp_path / "e.json"
    assert main(["entangle", "--rot1", "0.3", "--rot2", "0.3", "--theta1", "0.5", "--theta2", "0.5", "--out", str(out)]) == 0
    r = json.loads(out.read_text())
    assert r["physical_concurrence"] == pytest.approx(0.0, abs=1e-10)
    assert r["logical_concurrence"] == pytest.approx(0.0, abs=1e-10)


def test_hybrid(tmp_path):
    out = tmp_path / "h.json"
    assert main(["hybrid", "--out", str(out)]) == 0
    r = json.loads(out.read_text())
    assert r["closed_form_max_abs_error"] < 1e-12
    assert len(r["basis"]) == 4


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"phi_steps": 5, "theta-steps": 3}))
    out = tmp_path / "s.csv"
    assert main(["sweep-morphing", "--config", str(cfg), "--theta-steps", "4", "--out", str(out)]) == 0
    assert len(read_csv(out)) == 5 * 4
    meta = json.loads((tmp_path / "s.csv.meta.json").read_text())
    assert meta["config"]["phi_steps"] == 5


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"nonsense": 1}))
    with pytest.raises(SystemExit) as e:
        main(["sweep-morphing", "--config", str(cfg)])
    assert e.value.code == 2


def test_sample_json_and_csv(tmp_path):
    out = tmp_path / "s.json"
    assert main(["sample", "--shots", "100000", "--loss", "0.5", "--out", str(out)]) == 0
    r = json.loads(out.read_text())
    assert abs(r["z_score"]) < 6
    assert r["uncertainty_method"] == "delta"
    out2 = tmp_path / "s.csv"
    assert main(["sample", "--shots", "1000", "--format", "csv", "--out", str(out2)]) == 0
    rows = read_csv(out2)
    assert len(rows) == 6
    assert all(int(r["n0"]) + int(r["n1"]) + int(r["n_lost"]) == 1000 for r in rows)


def test_runtime_errors_exit_1(capsys):
    assert main(["sample", "--shots", "0"]) == 1
    assert "error" in json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_stdout_output(capsys):
    assert main(["witness", "--phi", "0.5", "--theta", "0.5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "phi,theta,value,violated" and len(lines) == 2
