"""Core configuration for the thicktri mesh pipeline.

Defines a typed Settings object backed by environment variables (and .env files)
for observability, output locations, and the numerical knobs of the sampler,
perturber, bound solver and certifier.
"""

from __future__ import (
    annotations,
)  # Allow postponed evaluation of annotations (Python typing nicety)

from pathlib import Path

from pydantic import Field  # Used to declare typed fields with metadata and validation
from pydantic_settings import (
    BaseSettings,
    SettingsConfigDict,  # Pydantic Settings config helper
)


class Settings(BaseSettings):
    """Typed application settings loaded from environment variables."""

    # Pydantic Settings configuration:
    # - env_file: load variables from a local .env file for development
    # - env_file_encoding: read .env as UTF-8
    # - extra="ignore": ignore any env vars that don't correspond to defined fields
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # ----------------------
    # OpenTelemetry / tracing
    # ----------------------

    # "memory" keeps spans in-process (tests, batch runs), "console" prints them,
    # anything else is treated as an OTLP gRPC endpoint such as http://localhost:4317.
    otel_exporter_otlp_endpoint: str = Field(
        default="memory",
        description="OTLP endpoint for trace export, or 'memory' / 'console'",
    )

    otel_service_name: str = Field(
        default="thicktri",
        description="OpenTelemetry service.name resource attribute",
    )

    otel_sampling_rate: float = Field(
        default=1.0,
        ge=0.0,
        le=1.0,
        description="Trace sampling rate (0.0-1.0); 1.0 for always on",
    )

    # ----------------------
    # Output / logging
    # ----------------------

    # Default directory for CLI artifacts; overridden by --output-dir.
    thicktri_output_dir: Path = Field(
        default=Path("runs"),
        description="Default output directory for CLI artifacts (THICKTRI_OUTPUT_DIR)",
    )

    log_level: str = Field(
        default="INFO",
        description="Root log level used by the CLI when no -v/--quiet flag is given",
    )

    # ----------------------
    # Numerical tolerances
    # ----------------------
    representation_tolerance: float = Field(
        default=1e-12,
        gt=0.0,
        description="Tolerance for hyperboloid / unit-normal representation checks",
    )
    geometric_tolerance: float = Field(
        default=1e-9,
        gt=0.0,
        description="Tolerance for derived geometric residuals and oracles",
    )

    # ----------------------
    # Net sampler
    # ----------------------
    probe_spacing_factor: float = Field(
        default=0.1,
        gt=0.0,
        le=0.5,
        description="Probe grid spacing as a fraction of epsilon",
    )
    dart_oversampling: float = Field(
        default=2.0,
        gt=0.0,
        description="Dart budget as a multiple of the packing upper bound",
    )
    jitter_max_retries: int = Field(
        default=100,
        ge=1,
        description="Maximum re-draws per point before genericity jitter fails",
    )

    # ----------------------
    # Sliver perturber
    # ----------------------
    max_trials: int = Field(
        default=1_000_000,
        ge=1,
        description="Rejection-sampling budget per vertex in theoretical mode",
    )
    adaptive_max_trials: int = Field(
        default=2_000,
        ge=1,
        description="Rejection-sampling budget per target d in adaptive mode",
    )
    adaptive_initial_divisor: float = Field(
        default=10.0,
        gt=1.0,
        description="Adaptive mode starts from d_k divided by this factor",
    )
    trial_batch_size: int = Field(
        default=64,
        ge=1,
        description="Candidate positions drawn per vectorized rejection batch",
    )

    # ----------------------
    # Bound solver
    # ----------------------
    schedule_floor: float = Field(
        default=1e-300,
        gt=0.0,
        description="Smallest d accepted by the schedule bisection",
    )
    schedule_rel_tol: float = Field(
        default=1e-6,
        gt=0.0,
        description="Relative tolerance of the d-schedule bisection",
    )
    alpha0_grid: int = Field(
        default=400,
        ge=10,
        description="Grid resolution per axis for the chord-angle minimization",
    )
    monte_carlo_samples: int = Field(
        default=100_000,
        ge=100,
        description="Default sample count of Monte Carlo volume verifiers",
    )

    # ----------------------
    # Certifier
    # ----------------------
    bilipschitz_grid_depth: int = Field(
        default=4,
        ge=1,
        description="Barycentric subdivision depth of the bilipschitz sample grid",
    )
    histogram_bins: int = Field(
        default=20,
        ge=1,
        description="Bin count for altitude and dihedral-angle histograms",
    )


# Instantiate a global settings object.
# Import it as `from src.core.config import settings` and use `settings.<field>`.
settings = Settings()
