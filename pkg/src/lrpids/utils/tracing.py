"""
lrpids OpenTelemetry Tracing Module.

Optional spans around the expensive stages of a run: window sampling, dense
eigensolves and the per-command pipelines. A slow configuration can then be
profiled stage by stage (how many windows were sampled, how large the
matrices were, which seeds dominated).

Tracing is off unless requested; without it every span is a shared no-op
object and the decorators add one attribute lookup per call.

Environment Variables:
- LRPIDS_ENABLE_TRACING: "true" turns spans on (default: false)
- LRPIDS_TRACING_EXPORTER: 'console' or 'otlp' (default: console)
- OTEL_EXPORTER_OTLP_ENDPOINT: gRPC endpoint of the collector for 'otlp'
"""

import functools
import inspect
import logging
import os
from contextlib import contextmanager
from typing import Any, Callable, Dict, Iterator, Mapping, Optional

logger = logging.getLogger("lrpids")

DEFAULT_OTLP_ENDPOINT = "http://localhost:4317"

_tracer = None
_tracing_enabled = False


class NoOpSpan:
    """Span stand-in used while tracing is off; accepts and drops everything."""

    def set_attribute(self, key: str, value: Any) -> None:
        pass

    def set_attributes(self, attributes: Mapping[str, Any]) -> None:
        pass

    def record_exception(self, exception: BaseException) -> None:
        pass

    def set_status(self, status: Any) -> None:
        pass

    def __enter__(self) -> "NoOpSpan":
        return self

    def __exit__(self, *exc_info) -> bool:
        return False


_noop_span = NoOpSpan()


def is_tracing_enabled() -> bool:
    """True when LRPIDS_ENABLE_TRACING is "true" (any case)."""
    return os.getenv("LRPIDS_ENABLE_TRACING", "false").strip().lower() == "true"


def _build_exporter(kind: str):
    from opentelemetry.sdk.trace.export import ConsoleSpanExporter

    if kind != "otlp":
        return ConsoleSpanExporter()
    try:
        from opentelemetry.exporter.otlp.proto.grpc.trace_exporter import OTLPSpanExporter
    except ImportError:
        logger.warning("OTLP span exporter is not installed; writing spans to the console")
        return ConsoleSpanExporter()
    endpoint = os.getenv("OTEL_EXPORTER_OTLP_ENDPOINT", DEFAULT_OTLP_ENDPOINT)
    logger.info(f"Sending spans to {endpoint}")
    return OTLPSpanExporter(endpoint=endpoint)


def init_tracing(service_name: str = "lrpids") -> None:
    """
    Sets up the tracer provider once per process.

    A missing OpenTelemetry installation or a failing exporter leaves
    tracing off with a warning; the run itself is never affected.

    Args:
        service_name: Reported as the service.name resource attribute.
    """
    global _tracer, _tracing_enabled

    _tracing_enabled = False
    if not is_tracing_enabled():
        logger.debug("Tracing off (LRPIDS_ENABLE_TRACING is not 'true')")
        return

    try:
        from opentelemetry import trace
        from opentelemetry.sdk.resources import SERVICE_NAME, Resource
        from opentelemetry.sdk.trace import TracerProvider
        from opentelemetry.sdk.trace.export import BatchSpanProcessor

        provider = TracerProvider(resource=Resource.create({SERVICE_NAME: service_name}))
        kind = os.getenv("LRPIDS_TRACING_EXPORTER", "console").strip().lower()
        provider.add_span_processor(BatchSpanProcessor(_build_exporter(kind)))
        trace.set_tracer_provider(provider)
        _tracer = trace.get_tracer("lrpids")
    except ImportError as e:
        logger.warning(f"Tracing requested but OpenTelemetry is unavailable: {e}")
        return
    except Exception as e:
        logger.warning(f"Tracing setup failed, continuing without spans: {e}")
        return

    _tracing_enabled = True
    logger.info(f"Tracing enabled for service '{service_name}'")


def _attribute_value(value: Any):
    # OpenTelemetry accepts primitives only; lists of seeds or radii become strings.
    if isinstance(value, (str, bool, int, float)):
        return value
    return str(value)[:500]


@contextmanager
def create_span(name: str, attributes: Optional[Mapping[str, Any]] = None) -> Iterator[Any]:
    """
    Opens a span named `name`, e.g. "ids.counting" or "command.atoms".

    Args:
        name: Span name.
        attributes: Span attributes; entries whose value is None are skipped.

    Yields:
        The live span, or the shared NoOpSpan while tracing is off.
    """
    if not _tracing_enabled or _tracer is None:
        yield _noop_span
        return

    from opentelemetry.trace import Status, StatusCode

    with _tracer.start_as_current_span(name) as span:
        for key, value in (attributes or {}).items():
            if value is not None:
                span.set_attribute(key, _attribute_value(value))
        try:
            yield span
        except Exception as e:
            span.record_exception(e)
            span.set_status(Status(StatusCode.ERROR, str(e)))
            raise


def trace_stage(stage: str, describe: Optional[Callable[[Dict[str, Any]], Dict[str, Any]]] = None):
    """
    Runs the decorated engine stage inside a `stage.<stage>` span.

    Args:
        stage: Stage label, e.g. "sample" or "eigen".
        describe: Maps the call's bound arguments (by parameter name) to
            span attributes such as the window radius or the matrix size.
            Only evaluated while tracing is on.

    Example:
        @trace_stage("eigen", lambda a: {"matrix.size": a["M"].size})
        def eigen(M, center=None, region=None): ...
    """
    def decorator(func: Callable) -> Callable:
        signature = inspect.signature(func)

        @functools.wraps(func)
        def traced(*args, **kwargs):
            if not _tracing_enabled:
                return func(*args, **kwargs)
            attributes = {"stage.function": func.__qualname__}
            if describe is not None:
                bound = signature.bind(*args, **kwargs)
                bound.apply_defaults()
                attributes.update(describe(bound.arguments))
            with create_span(f"stage.{stage}", attributes):
                return func(*args, **kwargs)

        return traced
    return decorator


def shutdown_tracing() -> None:
    """Flushes pending spans and turns tracing off."""
    global _tracing_enabled

    if not _tracing_enabled:
        return
    _tracing_enabled = False
    try:
        from opentelemetry import trace

        provider = trace.get_tracer_provider()
        if hasattr(provider, "shutdown"):
            provider.shutdown()
        logger.debug("Flushed and closed the span exporter")
    except Exception as e:
        logger.warning(f"Could not flush spans on shutdown: {e}")
