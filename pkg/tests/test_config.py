import pytest
import yaml

from botspotter.config import Config, config_from_dict, load_config
from botspotter.errors import ConfigError

from conftest import CONFIGS


def test_defaults():
    cfg = load_config(None, environ={})
    assert cfg == Config() and cfg.ensemble.cv_folds == 10 and cfg.graph.nodes == "single"


def test_shipped_configs_load():
    syn = load_config(CONFIGS / "synthetic.yaml", environ={})
    assert syn.seed == 7 and syn.ingest.anonymize == "keyed"
    assert syn.synthetic["scenario"] == str(CONFIGS / "scenario_default.yaml")
    load_config(CONFIGS / "real_data.yaml", environ={})


def test_relative_paths_resolve_against_the_file(tmp_path):
    (tmp_path / "c.yaml").write_text(yaml.safe_dump({"inputs": {"tweets": "data/t.jsonl"}}))
    cfg = load_config(tmp_path / "c.yaml", environ={})
    assert cfg.inputs.tweets == str(tmp_path / "data" / "t.jsonl")


def test_environment_overrides_paths_only(tmp_path):
    cfg = load_config(None, environ={"BOTSPOTTER_TWEETS": "/x/t.jsonl", "BOTSPOTTER_SEED": "9"})
    assert cfg.inputs.tweets == "/x/t.jsonl" and cfg.seed == 0


@pytest.mark.parametrize("bad", [
    {"colour": 1},
    {"seed": "x"},
    {"ingest": {"anonymize": "keyed"}},
    {"ingest": {"anonymize": "rot13"}},
    {"gate": {"pin": [0.9, 0.1]}},
    {"ensemble": {"kinds": ["xgboost"]}},
    {"ensemble": {"cv_folds": 1}},
    {"ensemble": {"delta": 1.0}},
    {"graph": {"nodes": "everyone"}},
    {"graph": {"iterations": 0}},
    {"reports": {"kinds": ["pie"]}},
    {"inputs": {"tweetz": "x"}},
])
def test_invalid_sections(bad):
    with pytest.raises(ConfigError):
        config_from_dict(bad)


def test_unreadable_files(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml", environ={})
    (tmp_path / "bad.yaml").write_text("seed: [unclosed")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "bad.yaml", environ={})
