import logging
import os
import sys
from unittest.mock import patch

import pytest

sys.path.append(os.path.join(os.path.dirname(__file__), '..'))
from turtle_tasksyn.config import ConfigError, deep_merge, load_config, resolve_env


@pytest.mark.parametrize("env_name", ["dev", "prod"])
def test_profiles_have_required_sections(env_name):
    config = load_config(env_name)
    assert config["env"] == env_name
    assert set(config["scoring"]["weights"]) == {"trajectory_quality", "visual_quality", "dissimilarity"}
    assert 0 <= config["scoring"]["threshold"] <= 1
    assert config["synthesis"]["max_instantiations"] > 0
    assert config["deployment_profile"] == {"easy": 3, "medium": 4, "hard": 3}


def test_cli_flag_wins():
    with patch.dict(os.environ, {"TASKSYN_ENV": "prod"}):
        assert resolve_env("DEV") == "dev"


def test_environment_variable_is_used(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    with patch.dict(os.environ, {"TASKSYN_ENV": "prod"}):
        assert resolve_env() == "prod"


def test_dotenv_file_is_read(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / ".env").write_text("TASKSYN_ENV=prod\n")
    with patch.dict(os.environ, {}, clear=True):
        assert resolve_env() == "prod"


def test_default_profile(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    with patch.dict(os.environ, {}, clear=True):
        assert resolve_env() == "dev"


def test_toml_override_is_merged(tmp_path, caplog):
    override = tmp_path / "override.toml"
    override.write_text('[scoring]\nthreshold = 0.8\n\n[scoring.weights]\nvisual_quality = 0.5\n\n[colour]\nmode = "x"\n')
    with caplog.at_level(logging.WARNING):
        config = load_config("dev", str(override))
    assert config["scoring"]["threshold"] == 0.8
    assert config["scoring"]["weights"]["visual_quality"] == 0.5
    assert config["scoring"]["weights"]["trajectory_quality"] == 0.4
    assert "colour" not in config
    assert "Ignoring unknown config key: colour" in caplog.text


def test_deep_merge_leaves_base_untouched():
    base = {"a": {"b": 1, "c": 2}}
    merged = deep_merge(base, {"a": {"b": 5}})
    assert merged == {"a": {"b": 5, "c": 2}}
    assert base == {"a": {"b": 1, "c": 2}}


def test_missing_profile():
    with pytest.raises(ConfigError, match="not found"):
        load_config("staging")


def test_missing_override(tmp_path):
    with pytest.raises(ConfigError, match="override not found"):
        load_config("dev", str(tmp_path / "nope.toml"))


def test_broken_yaml(tmp_path):
    (tmp_path / "dev.yml").write_text("scoring: [unclosed\n")
    with pytest.raises(ConfigError, match="Invalid YAML"):
        load_config("dev", config_dir=str(tmp_path))


if __name__ == "__main__":
    pytest.main(args=[__file__])
