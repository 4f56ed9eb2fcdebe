"""
Tests for engine and run configuration.
"""

import argparse

import pytest

from pauli_gaussian.config import EngineConfig, RunConfig, get_config, set_config
from pauli_gaussian.errors import UsageError


def test_defaults():
    config = EngineConfig()
    assert config.skew_tolerance == 1e-12
    assert config.max_enumeration_sites == 24
    assert config.workers == 1
    assert not config.allow_large_enumeration
    assert config.validate() == []


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("PAULI_GAUSSIAN_MAX_ENUM_SITES", "10")
    monkeypatch.setenv("PAULI_GAUSSIAN_WORKERS", "3")
    monkeypatch.setenv("PAULI_GAUSSIAN_ALLOW_LARGE", "TRUE")
    config = EngineConfig()
    assert config.max_enumeration_sites == 10
    assert config.workers == 3
    assert config.allow_large_enumeration
    assert config.enumeration_allowed(30)


def test_enumeration_allowed():
    config = EngineConfig(max_enumeration_sites=5)
    assert config.enumeration_allowed(5)
    assert not config.enumeration_allowed(6)


def test_validate_reports_issues():
    config = EngineConfig(workers=0, singular_band=2.0)
    issues = config.validate()
    assert "workers must be at least 1" in issues
    assert "singular_band must lie in (0, 1)" in issues


def test_singleton(fresh_config):
    assert get_config() is fresh_config
    other = EngineConfig(workers=2)
    set_config(other)
    assert get_config() is other


def test_run_config_state_sources():
    cfg = RunConfig("amplitude", model="tfim", random_seed=3)
    assert cfg.state_sources == ["--model", "--random"]
    with pytest.raises(UsageError, match="got --model, --random"):
        cfg.require_state_source()
    with pytest.raises(UsageError, match="got none"):
        RunConfig("amplitude").require_state_source()
    RunConfig("amplitude", state_file="s.json").require_state_source()


def test_run_config_format():
    with pytest.raises(UsageError):
        RunConfig("amplitude", output_format="xml")
    assert RunConfig("amplitude").format_or("json") == "json"
    assert RunConfig("amplitude", output_format="csv").format_or("json") == "csv"


def test_engine_config_overrides():
    engine = RunConfig("probability", workers=4, allow_large=True).engine_config()
    assert engine.workers == 4
    assert engine.allow_large_enumeration
    assert RunConfig("probability").engine_config().workers == 1


def test_from_args_collects_options():
    args = argparse.Namespace(
        command="postmeasure",
        model="tfim",
        L=16,
        J=1.0,
        h=0.5,
        output="scan.csv",
        format=None,
        pattern="x-all-plus",
        dmin=2,
        debug=False,
    )
    cfg = RunConfig.from_args(args)
    assert cfg.size == 16
    assert cfg.transverse_field == 0.5
    assert str(cfg.output) == "scan.csv"
    assert cfg.options == {"pattern": "x-all-plus", "dmin": 2}
