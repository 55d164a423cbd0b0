"""Unit tests for telemetry utilities."""

from __future__ import annotations

import pytest
from opentelemetry import trace
from opentelemetry.sdk.trace.export.in_memory_span_exporter import (
    InMemorySpanExporter,
)

from src.core.config import settings
from src.core.errors import DegeneracyError
from src.core.telemetry import (
    annotate_span,
    get_active_span_exporter,
    trace_operation,
)


def _finished(exporter: InMemorySpanExporter, name: str) -> list:
    trace.get_tracer_provider().force_flush()
    return [span for span in exporter.get_finished_spans() if span.name == name]


def test_trace_operation_records_success_span(span_exporter: InMemorySpanExporter) -> None:
    @trace_operation("unit", "succeeding")
    def sample(value: int) -> int:
        annotate_span(value=value)
        return value * 2

    assert sample(21) == 42

    spans = _finished(span_exporter, "unit.succeeding")
    assert spans, "expected at least one span"
    span = spans[-1]
    assert span.attributes["component"] == "unit"
    assert span.attributes["operation.type"] == "succeeding"
    assert span.attributes["operation.success"] is True
    assert span.attributes["value"] == 21
    assert span.attributes["execution_duration_ms"] >= 0
    assert span.resource.attributes["service.name"] == settings.otel_service_name


def test_trace_operation_records_failure_span(span_exporter: InMemorySpanExporter) -> None:
    @trace_operation("unit", "failing")
    def failing() -> None:
        raise DegeneracyError("flat", simplex=(0, 1, 2))

    with pytest.raises(DegeneracyError):
        failing()

    spans = _finished(span_exporter, "unit.failing")
    assert spans, "expected span even on error"
    span = spans[-1]
    assert span.attributes["operation.success"] is False
    assert span.attributes["error_type"] == "DegeneracyError"
    assert any(event.name == "exception" for event in span.events)


def test_nested_operations_share_a_trace(span_exporter: InMemorySpanExporter) -> None:
    @trace_operation("unit", "inner")
    def inner() -> None:
        return None

    @trace_operation("unit", "outer")
    def outer() -> None:
        inner()

    outer()

    (inner_span,) = _finished(span_exporter, "unit.inner")
    (outer_span,) = _finished(span_exporter, "unit.outer")
    assert inner_span.parent is not None
    assert inner_span.parent.span_id == outer_span.context.span_id


def test_annotate_span_outside_a_span_is_harmless() -> None:
    annotate_span(ignored=True)


def test_active_exporter_is_wired(span_exporter: InMemorySpanExporter) -> None:
    assert get_active_span_exporter() is not None
