"""Tests for environment-driven settings and logging setup."""

import logging

import pytest
from pydantic import ValidationError

from frobthresh.config import Settings, configure_logging, get_settings, resolve, settings_from_env


def test_defaults():
    s = Settings()
    assert (s.threads, s.max_chain, s.window, s.burn_in) == (1, 64, 4, 2)
    assert (s.max_scaling, s.u_max, s.nu_max_q) == (8, 6, 64)
    assert (s.max_candidates, s.expand_cap) == (200000, 4096)
    assert s.log_level == "WARNING"


def test_env_overrides():
    s = settings_from_env({"FROBTHRESH_THREADS": "4", "FROBTHRESH_LOG_LEVEL": "debug", "FROBTHRESH_WINDOW": ""})
    assert s.threads == 4
    assert s.log_level == "DEBUG"
    assert s.window == 4


@pytest.mark.parametrize(
    "environ",
    [{"FROBTHRESH_THREADS": "0"}, {"FROBTHRESH_LOG_LEVEL": "loud"}, {"FROBTHRESH_BURN_IN": "-1"}],
)
def test_env_rejects_bad_values(environ):
    with pytest.raises(ValidationError):
        settings_from_env(environ)


def test_settings_are_frozen_and_hashable():
    s = Settings()
    with pytest.raises(ValidationError):
        s.threads = 2
    assert hash(s) == hash(Settings())


def test_resolve_prefers_explicit_settings(monkeypatch):
    monkeypatch.setenv("FROBTHRESH_MAX_CHAIN", "7")
    get_settings.cache_clear()
    try:
        assert resolve(None).max_chain == 7
        explicit = Settings(max_chain=3)
        assert resolve(explicit) is explicit
    finally:
        get_settings.cache_clear()


@pytest.fixture
def package_logger():
    logger = logging.getLogger("frobthresh")
    before = list(logger.handlers), logger.level
    yield logger
    logger.handlers[:] = before[0]
    logger.setLevel(before[1])


def test_configure_logging_is_idempotent(package_logger):
    configure_logging("info")
    configure_logging("debug")
    ours = [h for h in package_logger.handlers if getattr(h, "_frobthresh", False)]
    assert len(ours) == 1
    assert package_logger.level == logging.DEBUG
