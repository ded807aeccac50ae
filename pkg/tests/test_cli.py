import csv
import json

import pytest

from toric_extremal.calabi import FactorNotPositive
from toric_extremal.cli import ParseError, ValidationError, load_config, parse_config, run
from toric_extremal.polytope import NotDelzant

SIMPLEX = {
    "halfspaces": [
        {"normal": [1, 0], "offset": "0"},
        {"normal": [0, 1], "offset": "0"},
        {"normal": [-1, -1], "offset": "1"},
    ]
}


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(data if isinstance(data, str) else json.dumps(data))
    return path


def test_parse_valid_config(tmp_path):
    cfg = parse_config(write(tmp_path, "c.json", {
        "polytope": SIMPLEX,
        "factors": [{"d": 1, "scal": "-8", "p": ["1", "2"], "c": "0.001"}],
        "command": {"name": "extremal-field"},
    }))
    assert cfg.fibration.factors[0].c.denominator == 1000
    assert len(cfg.polytope.vertices) == 3


def test_validation_errors():
    with pytest.raises(ValidationError) as err:
        load_config(json.dumps({"polytope": SIMPLEX, "factors": [{"p": [1, 2], "c": "0"}]}))
    assert isinstance(err.value.cause, FactorNotPositive)
    bad = {"halfspaces": [{"normal": [1, 0]}, {"normal": [0, 1]}, {"normal": [-1, -2], "offset": "1"}]}
    with pytest.raises(ValidationError) as err:
        load_config(json.dumps({"polytope": bad}))
    assert isinstance(err.value.cause, NotDelzant)
    with pytest.raises(ParseError) as err:
        load_config('{"polytope":\n  {oops')
    assert err.value.line == 2


def test_extremal_field_report(tmp_path, capsys):
    cfg = write(tmp_path, "s.json", {"polytope": SIMPLEX, "command": {"name": "extremal-field"}})
    assert run(["--config", str(cfg)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["computed"]["extremal_affine"] == {"A": ["0", "0"], "B": "-12"}


def test_exit_codes(tmp_path):
    bad = write(tmp_path, "b.json", {"polytope": SIMPLEX, "factors": [{"p": [1, 2], "c": "0"}]})
    assert run(["extremal-field", "--config", str(bad)]) == 2
    assert run(["extremal-field"]) == 2
    assert run(["polytope-check", "--config", str(tmp_path / "missing.json")]) == 2
    scan = write(tmp_path, "scan.json", {
        "polytope": SIMPLEX,
        "command": {"name": "stability-scan", "crease_normals": [[1, 1]], "grid": 10},
    })
    out = tmp_path / "scan" / "r.json"
    assert run(["--config", str(scan), "--out", str(out)]) == 3
    rows = list(csv.DictReader((tmp_path / "scan" / "r.probes.csv").open()))
    assert len(rows) == 9 and all(float(r["value_float"]) > 0 for r in rows)


def test_cp2_analyze_excluded(tmp_path):
    out = tmp_path / "a.json"
    code = run(["cp2-analyze", "--genus", "3", "--p1", "1", "--p2", "2", "--c", "0.001", "--out", str(out)])
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["verdicts"]["extremal_kahler_excluded"]["value"] is True
    for v in rep["verdicts"].values():
        assert v["certificate"] in rep["certificates"]
    assert (tmp_path / "a.crease.csv").exists()


def test_cp2_scan_positivity_table(tmp_path):
    out = tmp_path / "s.json"
    code = run(["cp2-scan", "--genus", "0", "--p1", "1", "--p2", "2", "--c-grid", "0.25,1,4", "--out", str(out)])
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "s.c_grid.csv").open()))
    assert [r["c"] for r in rows] == ["1/4", "1", "4"]
    assert all(float(r["min_eigenvalue"]) > 0 for r in rows)


def test_cp2_validation_failure():
    assert run(["cp2-analyze", "--genus", "3", "--p1", "2", "--p2", "1", "--c", "1"]) == 2
    assert run(["cp2-scan", "--genus", "3", "--p1", "1", "--p2", "2", "--c-grid", "1,-1"]) == 2


def test_reports_are_reproducible(tmp_path):
    cfg = write(tmp_path, "k.json", {
        "polytope": SIMPLEX,
        "factors": [{"d": 1, "scal": "-8", "p": ["1", "2"], "c": "1/100"}],
        "command": {"name": "stability-scan", "crease_normals": [[1, 1], [1, 0]], "grid": 8},
    })
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(["--config", str(cfg), "--out", str(a)])
    run(["--config", str(cfg), "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()
    # the echoed input is itself a valid config reproducing the report
    echo = write(tmp_path, "echo.json", json.loads(a.read_text())["input"])
    c = tmp_path / "c.json"
    run(["--config", str(echo), "--out", str(c)])
    assert c.read_bytes() == a.read_bytes()


def test_abreu_eval_and_k_energy(tmp_path):
    cfg = write(tmp_path, "h.json", {"polytope": SIMPLEX, "command": {"name": "abreu-eval", "H": "fubini_study"}})
    out = tmp_path / "h.json.out"
    assert run(["--config", str(cfg), "--out", str(out), "--resolution", "8"]) == 0
    rep = json.loads(out.read_text())
    assert all(rep["verdicts"][k]["value"] for k in rep["verdicts"])
    cfg = write(tmp_path, "e.json", {
        "polytope": SIMPLEX,
        "command": {"name": "k-energy", "potential": {"relative": True}},
    })
    out = tmp_path / "e.out.json"
    assert run(["--config", str(cfg), "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert abs(rep["computed"]["k_energy"]["relative"]) < 1e-8
