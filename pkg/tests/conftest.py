import sys
from pathlib import Path

import pytest

PROJECT_ROOT = Path(__file__).resolve().parent.parent
SRC_PATH = PROJECT_ROOT / "src"
if str(SRC_PATH) not in sys.path:
    sys.path.insert(0, str(SRC_PATH))

from lrpids.core.settings import RuntimeSettings, set_settings  # noqa: E402


@pytest.fixture(autouse=True)
def runtime_settings():
    """Fresh single-threaded settings per test; environment overrides are not inherited."""
    settings = RuntimeSettings(max_workers=1)
    set_settings(settings)
    yield settings
    set_settings(None)
