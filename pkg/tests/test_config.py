"""Configuration loading and validation."""

from pathlib import Path
from unittest.mock import patch

import pytest

from config import Config, create_default_env_file


def make_config(tmp_path, **env) -> Config:
    with patch.dict("os.environ", env, clear=True):
        return Config(env_path=tmp_path / ".env")


def test_defaults(tmp_path):
    config = make_config(tmp_path)
    assert config.max_steps == 100000
    assert config.store_suffix == ".kbxc"
    assert config.digest == "sha256"
    assert config.log_level == "WARNING"
    assert config.corpus_dir == Path(__file__).resolve().parents[1] / "corpus"
    assert config.validate() == (True, None)


def test_environment_overrides(tmp_path):
    config = make_config(tmp_path, KBX_MAX_STEPS="50", KBX_LOG_LEVEL="debug", KBX_CORPUS_DIR=str(tmp_path))
    assert config.max_steps == 50
    assert config.log_level == "DEBUG"
    assert config.corpus_dir == tmp_path


def test_env_file_wins_over_environment(tmp_path):
    (tmp_path / ".env").write_text("KBX_DIGEST=md5\n", encoding="utf-8")
    with patch.dict("os.environ", {"KBX_DIGEST": "sha1"}, clear=True):
        config = Config(env_path=tmp_path / ".env")
    assert config.digest == "md5"


@pytest.mark.parametrize(
    "env, message",
    [
        ({"KBX_MAX_STEPS": "many"}, "must be an integer"),
        ({"KBX_MAX_STEPS": "0"}, "must be positive"),
        ({"KBX_STORE_SUFFIX": "kbxc"}, "must start with a dot"),
        ({"KBX_DIGEST": "rot13"}, "not a hashlib algorithm"),
        ({"KBX_LOG_LEVEL": "LOUD"}, "not a logging level"),
    ],
)
def test_validation_errors(tmp_path, env, message):
    valid, error = make_config(tmp_path, **env).validate()
    assert not valid
    assert message in error


def test_reload_picks_up_changes(tmp_path):
    env_file = tmp_path / ".env"
    env_file.write_text("KBX_MAX_STEPS=10\n", encoding="utf-8")
    with patch.dict("os.environ", {}, clear=True):
        config = Config(env_path=env_file)
        assert config.max_steps == 10
        env_file.write_text("KBX_MAX_STEPS=20\n", encoding="utf-8")
        config.reload()
    assert config.max_steps == 20


def test_repr_lists_settings(tmp_path):
    assert "store_suffix=.kbxc" in repr(make_config(tmp_path))


def test_create_default_env_file(tmp_path):
    path = create_default_env_file(tmp_path / ".env")
    assert "KBX_MAX_STEPS=100000" in path.read_text()
    with patch.dict("os.environ", {}, clear=True):
        assert Config(env_path=path).validate() == (True, None)
    with pytest.raises(FileExistsError):
        create_default_env_file(path)
