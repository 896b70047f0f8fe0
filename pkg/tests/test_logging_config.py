import logging

from sce.core.logging_config import LOG_LEVEL_ENV, resolve_level


def test_environment_overrides_argument(monkeypatch):
    monkeypatch.setenv(LOG_LEVEL_ENV, "debug")
    assert resolve_level("ERROR") == logging.DEBUG


def test_argument_and_fallback(monkeypatch):
    monkeypatch.delenv(LOG_LEVEL_ENV, raising=False)
    assert resolve_level("warning") == logging.WARNING
    assert resolve_level(None) == logging.INFO
    assert resolve_level("chatty") == logging.INFO
