# tests/test_runtime.py

import logging

from respirad import DEFAULT_WORKERS, create_runtime
from respirad.constants import DEFAULT_PROFILE_OVERSAMPLE


def test_defaults_without_environment(monkeypatch):
    for key in ("RESPIRAD_LOG_LEVEL", "RESPIRAD_WORKERS", "RESPIRAD_PROFILE_OVERSAMPLE"):
        monkeypatch.delenv(key, raising=False)
    monkeypatch.setattr("respirad.load_dotenv", lambda: False)
    settings = create_runtime()
    assert settings.workers == DEFAULT_WORKERS
    assert settings.profile_oversample == DEFAULT_PROFILE_OVERSAMPLE
    assert settings.log_level == "INFO"


def test_environment_values_are_used(monkeypatch):
    monkeypatch.setattr("respirad.load_dotenv", lambda: False)
    monkeypatch.setenv("RESPIRAD_WORKERS", "4")
    monkeypatch.setenv("RESPIRAD_PROFILE_OVERSAMPLE", "8")
    monkeypatch.setenv("RESPIRAD_LOG_LEVEL", "debug")
    settings = create_runtime()
    assert (settings.workers, settings.profile_oversample, settings.log_level) == (4, 8, "DEBUG")


def test_cli_level_overrides_environment(monkeypatch):
    monkeypatch.setattr("respirad.load_dotenv", lambda: False)
    monkeypatch.setenv("RESPIRAD_LOG_LEVEL", "DEBUG")
    assert create_runtime("warning").log_level == "WARNING"


def test_invalid_integer_falls_back_with_warning(monkeypatch, caplog):
    monkeypatch.setattr("respirad.load_dotenv", lambda: False)
    monkeypatch.setenv("RESPIRAD_WORKERS", "muchos")
    monkeypatch.setenv("RESPIRAD_PROFILE_OVERSAMPLE", "0")
    with caplog.at_level(logging.WARNING, logger="respirad"):
        settings = create_runtime()
    assert settings.workers == DEFAULT_WORKERS
    assert settings.profile_oversample == DEFAULT_PROFILE_OVERSAMPLE
    assert "RESPIRAD_WORKERS='muchos'" in caplog.text
    assert "RESPIRAD_PROFILE_OVERSAMPLE=0 fuera de rango" in caplog.text
