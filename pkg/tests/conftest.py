"""
Global test fixtures.

Provides:
- span_exporter: InMemorySpanExporter wired into the tracer provider, cleared
  per test.
- small_domain / small_net: an H^2 patch and its maximal net, sized so that
  the default (non-slow) run stays fast.
- output_dir: a per-test artifact directory.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterator

import pytest
from opentelemetry.sdk.trace.export.in_memory_span_exporter import (
    InMemorySpanExporter,
)

from src.core.sampling import sample_maximal_net
from src.core.telemetry import set_span_exporter
from src.models.point_set import PatchDomain, PointSet

logging.basicConfig(
    level=logging.INFO, format="%(asctime)s [%(levelname)s] %(name)s: %(message)s"
)

_EXPORTER = InMemorySpanExporter()
set_span_exporter(_EXPORTER)


@pytest.fixture
def span_exporter() -> Iterator[InMemorySpanExporter]:
    _EXPORTER.clear()
    yield _EXPORTER
    _EXPORTER.clear()


@pytest.fixture(scope="session")
def small_domain() -> PatchDomain:
    return PatchDomain.centered(2, 1.2, 1.0)


@pytest.fixture(scope="session")
def small_net(small_domain: PatchDomain) -> PointSet:
    """Maximal 0.1-net of the radius-1.2 disk (mu = 10)."""
    net = sample_maximal_net(small_domain, 0.1, seed=7)
    return net.model_copy(update={"mu": 10.0})


@pytest.fixture
def output_dir(tmp_path: Path) -> Path:
    target = tmp_path / "run"
    target.mkdir()
    return target
