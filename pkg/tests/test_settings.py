"""Tests for runtime settings loaded from the environment."""
import logging
import os
from unittest.mock import patch

from lrpids.core.settings import (
    DEFAULT_DENSE_LIMIT,
    RuntimeSettings,
    get_settings,
    load_settings_from_env,
    set_settings,
)


class TestLoadSettingsFromEnv:
    """Test environment parsing."""

    def test_defaults(self):
        with patch.dict(os.environ, {}, clear=True):
            settings = load_settings_from_env()
        assert settings.cache_dir is None
        assert 1 <= settings.max_workers <= 4
        assert settings.dense_limit == DEFAULT_DENSE_LIMIT
        assert settings.max_truncation_radius == 100_000

    def test_values(self):
        env = {
            "LRPIDS_CACHE_DIR": "/tmp/lrpids-cache",
            "LRPIDS_MAX_WORKERS": "8",
            "LRPIDS_DENSE_LIMIT": "2000",
            "LRPIDS_MAX_TRUNCATION_RADIUS": "500",
        }
        with patch.dict(os.environ, env, clear=True):
            settings = load_settings_from_env()
        assert settings == RuntimeSettings(
            cache_dir="/tmp/lrpids-cache", max_workers=8, dense_limit=2000, max_truncation_radius=500
        )

    def test_invalid_values_fall_back(self, caplog):
        """Test that unparsable or too small values warn and use the default."""
        env = {"LRPIDS_DENSE_LIMIT": "lots", "LRPIDS_MAX_WORKERS": "0"}
        with patch.dict(os.environ, env, clear=True), caplog.at_level(logging.WARNING, logger="lrpids"):
            settings = load_settings_from_env()
        assert settings.dense_limit == DEFAULT_DENSE_LIMIT
        assert settings.max_workers >= 1
        assert "LRPIDS_DENSE_LIMIT" in caplog.text
        assert "LRPIDS_MAX_WORKERS" in caplog.text


class TestGlobalSettings:
    def test_set_and_reset(self):
        set_settings(RuntimeSettings(dense_limit=7))
        assert get_settings().dense_limit == 7
        set_settings(None)
        with patch.dict(os.environ, {"LRPIDS_DENSE_LIMIT": "11"}):
            assert get_settings().dense_limit == 11
