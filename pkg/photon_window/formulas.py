"""Copyright (c) 2023 Genome Research Ltd.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.

Closed-form emission rates ⟨τ⟩⁻¹ from the renormalization-group solution.
"""

import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field

from .app import app
from .errors import InvalidParameter
from .logger import get_logger
from .model import Regime, ScaledParams, classify_regime
from .series import lorentz_sum, saturated_lorentz_sum, series_row

logger = get_logger(__name__)


class RatePrediction(BaseModel):
    """Predicted first-photon emission rate."""

    inverse_tau: float = Field(..., ge=0.0)
    regime: Regime
    validity_warnings: list[str] = []

    @property
    def mean_tau(self) -> float:
        """Mean waiting time ⟨τ⟩, infinite for a vanishing rate."""
        return math.inf if self.inverse_tau == 0.0 else 1.0 / self.inverse_tau


def _require_gamma(gamma: float) -> None:
    if not gamma > 0:
        raise InvalidParameter(f"gamma must be positive, got {gamma}")


def _prediction(
    inverse_tau: float,
    params: ScaledParams,
    valid: tuple[Regime, ...],
    extra: Optional[list[str]] = None,
) -> RatePrediction:
    regime = classify_regime(params)
    warnings = []
    if regime not in valid:
        warnings.append(
            f"parameters are {regime.value}, formula assumes "
            + " or ".join(r.value for r in valid)
        )
    warnings.extend(extra or [])
    if inverse_tau == 0.0:
        warnings.append("zero emission rate: mean waiting time is infinite")
    for warning in warnings:
        logger.warning("%s (gamma=%g rabi=%g xi=%g delta=%g)", warning,
                       params.gamma, params.rabi, params.xi, params.detuning)
    return RatePrediction(
        inverse_tau=inverse_tau, regime=regime, validity_warnings=warnings
    )


def mean_tau_rg(xi: float, gamma: float, rabi: float) -> RatePrediction:
    """Weak-drive rate ⟨τ⟩⁻¹ = ΓΩ² Σ_k J_k(ξ)² / (Γ² + 4k²).

    Args:
        xi: Modulation index ξ.
        gamma: Decay rate Γ > 0.
        rabi: Rabi frequency Ω.

    Returns:
        RatePrediction: The rate with its regime.
    """
    return mean_tau_rg_detuned(xi, gamma, rabi, 0.0)


def mean_tau_rg_detuned(
    xi: float, gamma: float, rabi: float, delta: float
) -> RatePrediction:
    """Detuned weak-drive rate ΓΩ² Σ_k J_k(ξ)² / (Γ² + 4(k − δ)²).

    Args:
        xi: Modulation index ξ.
        gamma: Decay rate Γ ≥ 0; zero only for non-resonant δ.
        rabi: Rabi frequency Ω.
        delta: Detuning δ.

    Returns:
        RatePrediction: The rate with its regime.

    Raises:
        DivergentTerm: Γ = 0 at a resonance with non-vanishing weight.
        ValidationError: Γ or Ω is negative.
    """
    params = ScaledParams.create(
        gamma=gamma, rabi=rabi, xi=xi, detuning=delta
    )
    rate = gamma * rabi**2 * lorentz_sum(xi, gamma, delta)
    return _prediction(rate, params, (Regime.WEAK_DRIVE,))


def overlap_warnings(
    xi: float,
    gamma: float,
    rabi: float,
    threshold: Optional[float] = None,
) -> list[str]:
    """Describe overlapping resonances, Γ or Ω|J_k(ξ)| above threshold.

    Args:
        xi: Modulation index ξ.
        gamma: Decay rate Γ.
        rabi: Rabi frequency Ω.
        threshold: Overlap threshold, formulas.overlap by default.

    Returns:
        list[str]: One message per violated condition.
    """
    if threshold is None:
        threshold = app.settings.formulas.overlap
    warnings = []
    if gamma > threshold:
        warnings.append(
            f"resonances overlap: gamma={gamma:g} exceeds {threshold:g}"
        )
    row = series_row(xi)
    widths = rabi * np.abs(row.values)
    if np.any(widths > threshold):
        k = int(row.orders[np.argmax(widths)])
        warnings.append(
            f"resonances overlap: rabi·|J_{k}| = {widths.max():g} exceeds "
            f"{threshold:g}"
        )
    return warnings


def emission_rate_strong_drive(
    xi: float, gamma: float, rabi: float, delta: float = 0.0
) -> RatePrediction:
    """Saturated rate Σ_k ΓΩ²J_k² / (Γ² + 2Ω²J_k² + 4(k − δ)²).

    Valid while the sideband resonances do not overlap; otherwise the
    prediction carries a warning.

    Args:
        xi: Modulation index ξ.
        gamma: Decay rate Γ > 0.
        rabi: Rabi frequency Ω.
        delta: Detuning δ.

    Returns:
        RatePrediction: The rate with its regime and warnings.
    """
    _require_gamma(gamma)
    params = ScaledParams.create(
        gamma=gamma, rabi=rabi, xi=xi, detuning=delta
    )
    rate = saturated_lorentz_sum(xi, gamma, rabi, delta)
    return _prediction(
        rate,
        params,
        (Regime.WEAK_DRIVE, Regime.STRONG_DRIVE),
        overlap_warnings(xi, gamma, rabi),
    )
