"""
lrpids Workflow Module.

One pipeline per CLI command and the writer for their outputs.
"""

from .pipelines import PIPELINES, CommandResult, execute, write_outputs

__all__ = ["PIPELINES", "CommandResult", "execute", "write_outputs"]
