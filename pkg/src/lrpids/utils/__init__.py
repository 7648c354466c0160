"""
lrpids Utils Module.

- Content-addressed artifact cache
- CSV / JSON export with digest stamping
- Per-seed thread pool
- OpenTelemetry tracing

Plotting lives in `lrpids.utils.plotting` and is imported on demand, since it
depends on the engine.
"""

from .cache import ArtifactCache, digest
from .export import output_stem, write_csv, write_json
from .parallel import map_seeds
from .tracing import create_span, init_tracing, is_tracing_enabled, shutdown_tracing, trace_stage

__all__ = [
    "ArtifactCache",
    "digest",
    "output_stem",
    "write_csv",
    "write_json",
    "map_seeds",
    "create_span",
    "init_tracing",
    "is_tracing_enabled",
    "shutdown_tracing",
    "trace_stage",
]
