import csv
import json
import math

import numpy as np

from src.kvn.output import MANIFEST_FILE, SUMMARY_FILE, TIMESERIES_FILE, format_cell, to_json_value, write_csv, write_run


def test_format_cell():
    assert format_cell(0.1) == "0.1"
    assert format_cell(np.float64(1.0) / 3.0) == repr(1.0 / 3.0)
    assert float(format_cell(np.float64(2.0 / 7.0))) == 2.0 / 7.0
    assert format_cell(True) == "1"
    assert format_cell(np.bool_(False)) == "0"
    assert format_cell(np.int64(7)) == "7"
    assert format_cell("L|R") == "L|R"


def test_json_values():
    converted = to_json_value({"a": np.float64(math.nan), "b": np.arange(3), "c": 1 + 2j, 4: (np.bool_(True),)})
    assert converted == {"a": None, "b": [0, 1, 2], "c": [1.0, 2.0], "4": [True]}
    assert to_json_value(math.inf) is None


def test_write_csv_header_and_rows(tmp_path):
    path = tmp_path / "nested" / "series.csv"
    write_csv(str(path), ["t", "value"], [[0.0, 0.5], [0.25, True]])
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    assert rows == [["t", "value"], ["0.0", "0.5"], ["0.25", "1"]]
    assert [p.name for p in path.parent.iterdir()] == ["series.csv"]


def test_write_run_creates_every_artifact(tmp_path):
    paths = write_run(str(tmp_path / "run"), {"version": "x"}, ["t"], [[0.0]],
                      {"value": np.float64(0.5), "verdicts": {"ok": np.bool_(True)}},
                      {"povm.json": {"matrix": np.eye(2)}})
    assert set(paths) == {"manifest", "timeseries", "summary", "povm.json"}
    assert paths["manifest"].endswith(MANIFEST_FILE)
    assert paths["timeseries"].endswith(TIMESERIES_FILE)
    with open(paths["summary"]) as f:
        summary = json.load(f)
    assert summary == {"value": 0.5, "verdicts": {"ok": True}}
    assert paths["summary"].endswith(SUMMARY_FILE)
    with open(paths["povm.json"]) as f:
        assert json.load(f) == {"matrix": [[1.0, 0.0], [0.0, 1.0]]}
