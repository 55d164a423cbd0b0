from __future__ import annotations

import time
from functools import wraps
from typing import Any, Callable, Optional, TypeVar, cast

from opentelemetry import trace
from opentelemetry.exporter.otlp.proto.grpc.trace_exporter import OTLPSpanExporter
from opentelemetry.sdk.resources import Resource
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import (
    BatchSpanProcessor,
    ConsoleSpanExporter,
    SpanExporter,
)
from opentelemetry.sdk.trace.export.in_memory_span_exporter import InMemorySpanExporter
from opentelemetry.sdk.trace.sampling import TraceIdRatioBased
from opentelemetry.util.types import AttributeValue

from .config import settings

T = TypeVar("T")

_provider_initialized = False
_exporter_override: Optional[SpanExporter] = None
_active_exporter: Optional[SpanExporter] = None


def _create_default_exporter() -> SpanExporter:
    """
    Build the exporter named by OTEL_EXPORTER_OTLP_ENDPOINT.

    Tests can override via set_span_exporter to avoid network calls.
    """
    endpoint = settings.otel_exporter_otlp_endpoint
    if endpoint == "memory":
        return InMemorySpanExporter()
    if endpoint == "console":
        return ConsoleSpanExporter()
    return OTLPSpanExporter(endpoint=endpoint, insecure=True)


def _init_tracer_provider(exporter: Optional[SpanExporter] = None) -> None:
    global _provider_initialized, _active_exporter
    if _provider_initialized:
        return

    resource = Resource(attributes={"service.name": settings.otel_service_name})
    provider = TracerProvider(
        sampler=TraceIdRatioBased(settings.otel_sampling_rate),
        resource=resource,
    )
    resolved_exporter = exporter or _exporter_override or _create_default_exporter()
    provider.add_span_processor(BatchSpanProcessor(resolved_exporter))
    trace.set_tracer_provider(provider)
    _active_exporter = resolved_exporter
    _provider_initialized = True


def get_tracer(component: str = "pipeline") -> trace.Tracer:
    """
    Get a tracer for the specified component.

    Args:
        component: Component name (e.g., "kernel", "sampler", "perturber")

    Returns:
        OpenTelemetry Tracer instance
    """
    _init_tracer_provider()
    return trace.get_tracer(f"thicktri.{component}")


def set_span_exporter(exporter: SpanExporter) -> SpanExporter:
    """
    Override the exporter (useful for tests with InMemorySpanExporter).
    """
    global _exporter_override, _provider_initialized, _active_exporter
    _exporter_override = exporter
    if _provider_initialized:
        provider = cast(TracerProvider, trace.get_tracer_provider())
        provider.add_span_processor(BatchSpanProcessor(exporter))
        _active_exporter = exporter
    else:
        _init_tracer_provider(exporter=exporter)
    _provider_initialized = True
    return exporter


def get_active_span_exporter() -> Optional[SpanExporter]:
    """Return the exporter currently wired into the tracer provider."""
    return _active_exporter


def annotate_span(**attributes: AttributeValue) -> None:
    """Attach domain attributes (stage k, vertex counts, achieved d) to the current span."""
    span = trace.get_current_span()
    for key, value in attributes.items():
        span.set_attribute(key, value)


def trace_operation(
    component: str, operation_name: str
) -> Callable[[Callable[..., T]], Callable[..., T]]:
    """
    Decorator to create a span around a synchronous pipeline operation.

    Span name is "{component}.{operation_name}". Sets component, operation.type,
    operation.success and execution_duration_ms; on failure also error_type, and
    the exception is recorded and re-raised.

    Usage:
        @trace_operation("delaunay", "build")
        def build_delaunay(...):
            ...
    """

    def decorator(func: Callable[..., T]) -> Callable[..., T]:
        tracer = get_tracer(component)

        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> T:
            with tracer.start_as_current_span(f"{component}.{operation_name}") as span:
                span.set_attribute("component", component)
                span.set_attribute("operation.type", operation_name)
                start_time = time.perf_counter()
                try:
                    result = func(*args, **kwargs)
                    span.set_attribute("operation.success", True)
                    return result
                except Exception as exc:
                    span.set_attribute("operation.success", False)
                    span.set_attribute("error_type", type(exc).__name__)
                    span.record_exception(exc)
                    raise
                finally:
                    duration_ms = int((time.perf_counter() - start_time) * 1000)
                    span.set_attribute("execution_duration_ms", duration_ms)

        return wrapper

    return decorator
