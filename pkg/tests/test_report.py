import json

import numpy as np

from silab import report


def test_jsonable_types():
    out = report.jsonable({"a": np.int64(3), "b": np.array([1.5, 2.0]), "c": 1 + 2j,
                           "d": float("nan"), "e": np.bool_(True), 4: (1, 2)})
    assert out == {"a": 3, "b": [1.5, 2.0], "c": [1.0, 2.0], "d": "nan", "e": True, "4": [1, 2]}
    json.dumps(out)


def test_dumps_is_order_independent():
    assert report.dumps({"b": 1, "a": 2}) == report.dumps({"a": 2, "b": 1})


def test_envelope_and_hash():
    cfg = {"steps": 10, "alpha": 1.5}
    env = report.envelope("demo", cfg, 7, {"x": 1})
    assert env["schema"] == report.SCHEMA_VERSION
    assert env["seed"] == 7
    assert env["config_hash"] == report.config_hash({"alpha": 1.5, "steps": 10})
    assert env["config_hash"] != report.config_hash({"alpha": 1.5, "steps": 11})
    assert env["tool_version"]


def test_writers(tmp_path):
    report.write_csv(tmp_path / "t.csv", ["m", "i"], [(1, np.int64(2)), (2, 4)])
    assert (tmp_path / "t.csv").read_text() == "m,i\n1,2\n2,4\n"
    report.write_plot_data(tmp_path / "p.dat", {"k": [1, 2], "r": [0.5, 0.25]})
    lines = (tmp_path / "p.dat").read_text().splitlines()
    assert lines[0] == "# k r"
    assert lines[1:] == ["1 0.5", "2 0.25"]
