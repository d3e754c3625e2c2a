import pytest
from pydantic import ValidationError

from src.config import Config


def test_defaults():
    config = Config(_env_file=None)
    assert config.max_branches == 64
    assert config.threads == 1
    assert config.prune_paths is True
    assert config.pareto_remdr_steps == 8


def test_log_level_from_short_env_name(monkeypatch):
    monkeypatch.setenv("CHAINFORGE_LOG", "debug")
    assert Config(_env_file=None).log_level == "DEBUG"


def test_env_prefix(monkeypatch):
    monkeypatch.setenv("CHAINFORGE_TIME_LIMIT", "12.5")
    monkeypatch.setenv("CHAINFORGE_THREADS", "3")
    config = Config(_env_file=None)
    assert config.time_limit == 12.5
    assert config.threads == 3


@pytest.mark.parametrize(
    "field,value",
    [("log_level", "chatty"), ("threads", 0), ("max_branches", -1), ("time_limit", 0)],
)
def test_rejects_invalid_values(field, value):
    with pytest.raises(ValidationError):
        Config(_env_file=None, **{field: value})
