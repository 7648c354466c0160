"""
lrpids CLI Module.

- Typer CLI commands and entry point
- Rich console UI components
"""

from .main import app, run
from .ui import console, display_error, display_summary, print_error, print_success, print_warning, setup_logging

__all__ = [
    "app",
    "run",
    "console",
    "display_error",
    "display_summary",
    "print_error",
    "print_success",
    "print_warning",
    "setup_logging",
]
