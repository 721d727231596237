"""Copyright (c) 2023 Genome Research Ltd.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from pathlib import Path
from typing import Optional

from pydantic import BaseModel


class LoggingConfig(BaseModel):
    """Logging config model."""

    level: str
    filename: Optional[Path]
    formatters: dict[str, dict[str, str]]


class RegimeConfig(BaseModel):
    """Drive regime thresholds, in scaled units."""

    weak: float
    strong: float


class SeriesConfig(BaseModel):
    """Bessel series config model."""

    tol: float
    min_order: int
    small_argument: float


class DynamicsConfig(BaseModel):
    """Time evolution and quadrature config model."""

    rtol: float
    atol: float
    tail_tol: float
    samples_per_period: int
    max_samples_per_period: int
    halving_tol: float
    max_periods: int
    tail_fit_residual: float
    sample_spacing: float


class FormulasConfig(BaseModel):
    """Closed-form predictions config model."""

    overlap: float


class ResonanceConfig(BaseModel):
    """Resonance analysis config model."""

    scan_step: float
    root_tol: float
    fold_tol: float
    gamma_start: float
    gamma_step: float
    gamma_max: float
    ladder_width: float
    ladder_points: int
    min_fit_points: int
    fit_rms_tol: float
    small_gamma: float


class BlochConfig(BaseModel):
    """Optical Bloch solver config model."""

    samples_per_period: int
    tol: float
    max_periods: int


class OutputConfig(BaseModel):
    """Output formatting config model."""

    digits: int
