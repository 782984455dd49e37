import json
import os

import pytest

from src.config import load_json, load_scenario_config, resolve_config, resolve_output_dir, save_json
from src.kvn.defaults import SCENARIO_NAMES, defaults_for, merge_config
from src.kvn.errors import ConfigurationError, UnknownScenarioError


def write_config(directory, document, name="config.json"):
    path = directory / name
    path.write_text(json.dumps(document), encoding="utf-8")
    return str(path)


def test_load_json_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        load_json(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{\"scenario\": ", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        load_json(str(broken))


def test_save_json_round_trip(tmp_path):
    path = str(tmp_path / "out" / "data.json")
    save_json(path, {"b": 1, "a": [1.5]})
    assert load_json(path) == {"a": [1.5], "b": 1}


def test_every_scenario_has_defaults():
    assert len(SCENARIO_NAMES) == 11
    for name in SCENARIO_NAMES:
        assert defaults_for(name)["scenario"] == name


def test_merge_replaces_lists_and_merges_objects():
    base = {"grids": {"x": {"n": 64, "origin": -8.0}}, "shifts": [1, 2]}
    merged = merge_config(base, {"grids": {"x": {"n": 128}}, "shifts": [3]})
    assert merged == {"grids": {"x": {"n": 128, "origin": -8.0}}, "shifts": [3]}
    assert base["grids"]["x"]["n"] == 64


def test_resolve_merges_scenario_defaults():
    resolved = resolve_config({"scenario": "hybrid-boost", "coupling": {"c": 0.1}, "T": 1.0})
    assert resolved["coupling"] == {"c": 0.1, "kind": "boost"}
    assert resolved["T"] == 1.0
    assert resolved["dt"] == 5e-3
    assert resolved["tolerances"]["isolation"] == 1e-9


def test_schema_violations_are_rejected():
    with pytest.raises(ConfigurationError):
        resolve_config({"scenario": "classical-ho", "speed": 1})
    with pytest.raises(ConfigurationError):
        resolve_config({"scenario": "classical-ho", "dt": -1.0})
    with pytest.raises(ConfigurationError):
        resolve_config({"scenario": "hybrid-obs", "coupling": {"kind": "spring"}})
    with pytest.raises(ConfigurationError):
        resolve_config({"dt": 0.1})


def test_unknown_scenario_lists_the_registry():
    with pytest.raises(UnknownScenarioError) as excinfo:
        resolve_config({"scenario": "classical-pendulum"})
    assert excinfo.value.known == list(SCENARIO_NAMES)
    assert "known scenarios (11)" in str(excinfo.value)


def test_load_scenario_config_from_file(tmp_path):
    path = write_config(tmp_path, {"scenario": "quantum-free", "T": 0.5})
    resolved = load_scenario_config(path)
    assert resolved["grids"]["q"]["n"] == 512
    assert resolved["T"] == 0.5
    with pytest.raises(ConfigurationError):
        load_scenario_config(write_config(tmp_path, [1, 2], "list.json"))


def test_shipped_scenario_files_resolve():
    directory = os.path.join(os.path.dirname(os.path.dirname(__file__)), "scenarios")
    names = sorted(os.listdir(directory))
    assert names
    for name in names:
        resolved = load_scenario_config(os.path.join(directory, name))
        assert resolved["scenario"] in SCENARIO_NAMES


def test_output_dir_uses_environment_root(tmp_path, monkeypatch):
    monkeypatch.setenv("KVN_OUTPUT_ROOT", str(tmp_path))
    config = {"scenario": "premeasure", "output_dir": "runs"}
    assert resolve_output_dir(config) == os.path.join(str(tmp_path), "runs", "premeasure")
    absolute = str(tmp_path / "elsewhere")
    assert resolve_output_dir({"scenario": "premeasure", "output_dir": absolute}) == absolute
