"""
lrpids Runtime Settings Module.

Process-level knobs that are not part of an experiment: where the artifact
cache lives, how many worker threads run per-seed pipelines, and the limits
that keep computations at desk scale. They change how fast a result is
produced, never which result is produced, so they stay out of the config
digest.

Configuration is done via environment variables (a `.env` file is honoured
by the CLI through python-dotenv):
- LRPIDS_CACHE_DIR: Artifact cache root (default: <output dir>/.cache)
- LRPIDS_MAX_WORKERS: Threads for per-seed pipelines (default: min(4, cpus))
- LRPIDS_DENSE_LIMIT: Largest matrix size stored dense (default: 6000)
- LRPIDS_MAX_TRUNCATION_RADIUS: Hard cap on the edge-length cutoff (default: 100000)
"""

import logging
import os
from dataclasses import dataclass
from typing import Optional

logger = logging.getLogger("lrpids")

DEFAULT_DENSE_LIMIT = 6000
DEFAULT_MAX_TRUNCATION_RADIUS = 100_000


def _default_workers() -> int:
    return max(1, min(4, os.cpu_count() or 1))


@dataclass
class RuntimeSettings:
    """
    Runtime settings for lrpids.

    Attributes:
        cache_dir: Artifact cache root; None means "next to the outputs".
        max_workers: Thread pool size for per-seed pipelines.
        dense_limit: Largest matrix size assembled dense and eigensolved.
        max_truncation_radius: Largest admissible edge-length cutoff.
    """
    cache_dir: Optional[str] = None
    max_workers: int = 1
    dense_limit: int = DEFAULT_DENSE_LIMIT
    max_truncation_radius: int = DEFAULT_MAX_TRUNCATION_RADIUS


# Global settings instance
_settings: Optional[RuntimeSettings] = None


def _int_from_env(name: str, default: int, minimum: int = 1) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring {name}={raw!r}: not an integer, using {default}")
        return default
    if value < minimum:
        logger.warning(f"Ignoring {name}={value}: must be >= {minimum}, using {default}")
        return default
    return value


def load_settings_from_env() -> RuntimeSettings:
    """
    Loads runtime settings from environment variables.

    Returns:
        RuntimeSettings: Settings with defaults for anything unset or invalid.
    """
    return RuntimeSettings(
        cache_dir=os.getenv("LRPIDS_CACHE_DIR") or None,
        max_workers=_int_from_env("LRPIDS_MAX_WORKERS", _default_workers()),
        dense_limit=_int_from_env("LRPIDS_DENSE_LIMIT", DEFAULT_DENSE_LIMIT),
        max_truncation_radius=_int_from_env("LRPIDS_MAX_TRUNCATION_RADIUS", DEFAULT_MAX_TRUNCATION_RADIUS),
    )


def get_settings() -> RuntimeSettings:
    """
    Returns the global runtime settings.

    If not initialized, loads them from environment variables.
    """
    global _settings
    if _settings is None:
        _settings = load_settings_from_env()
    return _settings


def set_settings(settings: Optional[RuntimeSettings]) -> None:
    """
    Sets the global runtime settings; None forces a reload on next access.

    Args:
        settings (RuntimeSettings): The settings to install.
    """
    global _settings
    _settings = settings
