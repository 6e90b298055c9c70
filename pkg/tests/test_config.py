"""Tests for the run configuration."""
import json

import pytest

from tourplanner.config import (
    ConfigError,
    ConfigMismatch,
    apply_overrides,
    build_providers,
    check_hash,
    config_hash,
    load_config,
    validate_config,
)
from tourplanner.providers import AuthError
from tourplanner.providers.mock import MockProvider
from tourplanner.providers.replay import ReplayProvider


def test_defaults(config):
    assert config["seed"] == 0
    assert config["sandbox"] is None
    assert config["ccot"] == {"min_agents": 4, "max_agents": 6, "top_k": 3, "smoothing": 0.01}
    assert config["gate"] == {"tau": 0.75, "k": 28.0}
    assert config["schedule"]["day_end"] == "22:30"
    assert config["providers"]["chat"]["mock"] is True
    assert config["providers"]["embed"]["model"] == "text-embedding-3-small"
    assert validate_config(config) == config


def test_apply_overrides():
    raw = {"ccot": {"top_k": 3}}
    result = apply_overrides(
        raw,
        ["ccot.top_k=2", "sandbox=data/sandbox.json", "providers.chat.mock=false"],
    )
    assert result == {
        "ccot": {"top_k": 2},
        "sandbox": "data/sandbox.json",
        "providers": {"chat": {"mock": False}},
    }
    assert raw == {"ccot": {"top_k": 3}}


@pytest.mark.parametrize("override", ["ccot.top_k", "=3", "seed.value=1"])
def test_malformed_override(override):
    with pytest.raises(ConfigError):
        apply_overrides({"seed": 0}, [override])


@pytest.mark.parametrize(
    "override",
    [
        "ccot.top_k=0",
        "ccot.min_agents=7",
        "recall.semantic_per_day=10",
        "cluster.eps_floor=2.0",
        "gate.tau=1.0",
        "schedule.day_end=\"25:00\"",
        "recall.landmark_grade_floor=\"6A\"",
        "bogus=1",
    ],
)
def test_invalid_values(override):
    with pytest.raises(ConfigError):
        load_config(overrides=[override])


def test_load_config_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"seed": 7, "ccot": {"top_k": 2}}), encoding="utf-8")
    config = load_config(path, ["gspo.eps_low=0.001"])
    assert (config["seed"], config["ccot"]["top_k"], config["ccot"]["max_agents"]) == (7, 2, 6)
    assert config["gspo"]["eps_low"] == 0.001
    path.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(path)


def test_config_hash(config):
    assert config_hash(config) == config_hash(load_config())
    assert len(config_hash(config)) == 64
    other = load_config(overrides=["seed=1"])
    assert config_hash(other) != config_hash(config)
    check_hash(config, config_hash(config))
    check_hash(config, None)
    with pytest.raises(ConfigMismatch):
        check_hash(config, config_hash(other))


def test_build_providers(config, sandbox):
    providers = build_providers(config, sandbox)
    assert all(isinstance(provider, MockProvider) for provider in providers)
    assert [provider.config.role for provider in providers] == ["chat", "embed", "reward", "judge"]
    assert providers.embed.config.model_name == "text-embedding-3-small"
    replaying = build_providers(config, replay=[])
    assert all(isinstance(provider, ReplayProvider) for provider in replaying)


def test_remote_provider_needs_key(monkeypatch):
    monkeypatch.delenv("TOURPLANNER_TEST_KEY", raising=False)
    config = load_config(
        overrides=[
            "providers.chat.mock=false",
            "providers.chat.api_key_env=\"TOURPLANNER_TEST_KEY\"",
        ]
    )
    with pytest.raises(AuthError):
        build_providers(config)
