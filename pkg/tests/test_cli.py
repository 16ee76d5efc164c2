import json
import subprocess
import sys
from pathlib import Path

import pytest
from click.testing import CliRunner

from silab.cli import main

SPECS = Path(__file__).resolve().parent.parent / "specs"


@pytest.fixture
def runner():
    return CliRunner()


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_index_rotor(runner, tmp_path):
    r = runner.invoke(main, ["index", "--system", str(SPECS / "rotor1.json"), "--out", str(tmp_path)])
    assert r.exit_code == 0, r.output
    rep = json.loads((tmp_path / "index.json").read_text())
    assert rep["schema"] == "silab-report/1"
    point = rep["result"]["points"][0] if "points" in rep["result"] else rep["result"]
    assert (point["i"], point["nu"]) == (1, 2)
    assert "timing.json" in {p.name for p in tmp_path.iterdir()}


def test_mean_index_rotor(runner, tmp_path):
    r = runner.invoke(main, ["mean-index", "--system", str(SPECS / "rotor1.json"), "--out", str(tmp_path)])
    assert r.exit_code == 0, r.output
    rep = json.loads((tmp_path / "mean_index.json").read_text())
    assert rep["result"]["mean"] == pytest.approx(2.0, abs=1e-9)


def test_splitting_rotor(runner, tmp_path):
    r = runner.invoke(main, ["splitting", "--system", str(SPECS / "rotor1.json"), "--omega", "1",
                             "--out", str(tmp_path)])
    assert r.exit_code == 0, r.output
    text = (tmp_path / "splitting.json").read_text()
    assert '"s_plus": 1' in text and '"s_minus": 1' in text


def test_trigonometric_system(runner, tmp_path):
    spec = {"tau": 1.0, "B0": [[2, 0], [0, 2]], "cos": [[[0.3, 0], [0, 0.1]]], "sin": []}
    r = runner.invoke(main, ["index", "--system", _write(tmp_path, "s.json", spec), "--omega", "-1",
                             "--omega", "theta=1.0", "--out", str(tmp_path)])
    assert r.exit_code == 0, r.output


@pytest.mark.parametrize(
    "spec, field",
    [
        ({"n": 1, "tau": 1.0}, "B"),
        ({"n": 1, "tau": -1.0, "B": [[1, 0], [0, 1]]}, "tau"),
        ({"n": 2, "tau": 1.0, "B": [[1, 0], [0, 1]]}, "B"),
    ],
)
def test_malformed_system_exit_2(runner, tmp_path, spec, field):
    r = runner.invoke(main, ["index", "--system", _write(tmp_path, "bad.json", spec), "--out", str(tmp_path)])
    assert r.exit_code == 2
    assert field in r.output


def test_bad_tolerance_and_omega(runner, tmp_path):
    r = runner.invoke(main, ["index", "--system", str(SPECS / "rotor1.json"), "--tol", "nope=1",
                             "--out", str(tmp_path)])
    assert r.exit_code == 2
    r = runner.invoke(main, ["index", "--system", str(SPECS / "rotor1.json"), "--omega", "2",
                             "--out", str(tmp_path)])
    assert r.exit_code == 2


def test_config_file_precedence(runner, tmp_path):
    cfg = _write(tmp_path, "cfg.json", {"steps": 512, "seed": 9})
    r = runner.invoke(main, ["mean-index", "--system", str(SPECS / "rotor1.json"), "--config", cfg,
                             "--seed", "4", "--out", str(tmp_path)])
    assert r.exit_code == 0, r.output
    rep = json.loads((tmp_path / "mean_index.json").read_text())
    assert rep["seed"] == 4
    assert rep["config"]["steps"] == 512
    bad = _write(tmp_path, "cfg2.json", {"stepz": 1})
    r = runner.invoke(main, ["mean-index", "--system", str(SPECS / "rotor1.json"), "--config", bad])
    assert r.exit_code == 2 and "stepz" in r.output


def test_bott_check_deterministic(runner, tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        r = runner.invoke(main, ["bott-check", "--cases", "4", "--m", "3", "--seed", "5", "--out", str(out)])
        assert r.exit_code == 0, r.output
        outs.append(((out / "bott_check.json").read_bytes(), (out / "bott_table.csv").read_bytes()))
    assert outs[0] == outs[1]


@pytest.mark.slow
def test_verify_e1(runner, tmp_path):
    body = _write(tmp_path, "e1.json", {"n": 1, "kind": "ellipsoid", "radii": [1.0]})
    r = runner.invoke(main, ["verify", "--body", body, "--seeds", "8", "--nmax", "500", "--kmax", "6",
                             "--mmax", "6", "--out", str(tmp_path / "v")])
    assert r.exit_code == 0, r.output
    rep = json.loads((tmp_path / "v" / "verify.json").read_text())
    assert rep["result"]["count"]["verdict"] == "pass"
    assert (tmp_path / "v" / "intervals.csv").exists()


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "silab.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0
    for name in ("index", "splitting", "bott-check", "verify", "jump-search"):
        assert name in r.stdout
