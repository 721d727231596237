"""Copyright (c) 2023 Genome Research Ltd.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.

Parameter records shared by every computation.

All computations run in units of the rf angular frequency (omega_rf = 1);
physical units exist only where a configuration is read.
"""

import math
from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel, Extra, validator

from .app import app
from .errors import NonPositiveFrequency


def _finite(value: float) -> float:
    if not math.isfinite(value):
        raise ValueError(f"value must be finite, got {value}")
    return value


def _non_negative(value: float) -> float:
    if value < 0:
        raise ValueError(f"value must be non-negative, got {value}")
    return value


class PhysicalParams(BaseModel):
    """System parameters in physical units (rad/s)."""

    omega_rf: float
    gamma: float = 0.0
    rabi: float = 0.0
    detuning: float = 0.0
    v_g: float = 0.0
    v_e: float = 0.0

    class Config:
        """Model config."""

        frozen = True
        extra = Extra.forbid

    _finite = validator("*", allow_reuse=True)(_finite)
    _non_negative = validator("gamma", "rabi", allow_reuse=True)(
        _non_negative
    )

    @classmethod
    def from_cyclic(
        cls, scale: float = 2e6 * math.pi, **rates: float
    ) -> "PhysicalParams":
        """Create parameters from cyclic frequencies.

        Args:
            scale: Factor converting the given unit to rad/s, 2π·10⁶ for MHz.
            **rates: Field values in the given unit.

        Returns:
            PhysicalParams: Parameters in rad/s.
        """
        return cls(**{name: value * scale for name, value in rates.items()})


class ScaledParams(BaseModel):
    """Dimensionless parameters, every rate divided by omega_rf."""

    gamma: float = 0.0
    rabi: float = 0.0
    detuning: float = 0.0
    v_g: float = 0.0
    v_e: float = 0.0

    class Config:
        """Model config."""

        frozen = True
        extra = Extra.forbid

    _finite = validator("*", allow_reuse=True)(_finite)
    _non_negative = validator("gamma", "rabi", allow_reuse=True)(
        _non_negative
    )

    @property
    def xi(self) -> float:
        """Modulation index, the difference of the diagonal couplings."""
        return self.v_e - self.v_g

    @classmethod
    def create(
        cls,
        gamma: float = 0.0,
        rabi: float = 0.0,
        xi: float = 0.0,
        detuning: float = 0.0,
        v_g: float = 0.0,
    ) -> "ScaledParams":
        """Create parameters from a modulation index.

        Args:
            gamma: Decay rate Γ.
            rabi: Rabi frequency Ω.
            xi: Modulation index ξ.
            detuning: Laser detuning δ.
            v_g: Ground state rf coupling; v_e is v_g + ξ.

        Returns:
            ScaledParams: A new parameter record.
        """
        return cls(
            gamma=gamma,
            rabi=rabi,
            detuning=detuning,
            v_g=v_g,
            v_e=v_g + xi,
        )

    def replace(self, **changes: Any) -> "ScaledParams":
        """Copy with changed fields; `xi` moves v_e and keeps v_g.

        Args:
            **changes: New field values.

        Returns:
            ScaledParams: A validated copy.
        """
        values = self.dict()
        xi: Optional[float] = changes.pop("xi", None)
        values.update(changes)
        if xi is not None:
            values["v_e"] = values["v_g"] + xi
        return ScaledParams(**values)


class Regime(str, Enum):
    """Drive regime of a parameter set."""

    WEAK_DRIVE = "WeakDrive"
    STRONG_DRIVE = "StrongDrive"
    OUTSIDE = "Outside"


def scale_to_rf_units(p: PhysicalParams) -> ScaledParams:
    """Convert physical parameters to rf units.

    Args:
        p: Parameters in rad/s.

    Returns:
        ScaledParams: Every rate divided by omega_rf.

    Raises:
        NonPositiveFrequency: omega_rf is not positive.
    """
    if not p.omega_rf > 0:
        raise NonPositiveFrequency(
            f"omega_rf must be positive, got {p.omega_rf}"
        )
    w = p.omega_rf
    return ScaledParams(
        gamma=p.gamma / w,
        rabi=p.rabi / w,
        detuning=p.detuning / w,
        v_g=p.v_g / w,
        v_e=p.v_e / w,
    )


def classify_regime(
    s: ScaledParams,
    weak: Optional[float] = None,
    strong: Optional[float] = None,
) -> Regime:
    """Classify the drive regime.

    Args:
        s: Scaled parameters.
        weak: Weak-drive ratio, Ω ≤ weak·min(Γ, 1).
        strong: Strong-drive ceiling, Γ < Ω ≤ strong.

    Returns:
        Regime: The regime tag.
    """
    weak = app.settings.regime.weak if weak is None else weak
    strong = app.settings.regime.strong if strong is None else strong
    if s.rabi <= weak * min(s.gamma, 1.0):
        return Regime.WEAK_DRIVE
    if s.gamma < s.rabi <= strong:
        return Regime.STRONG_DRIVE
    return Regime.OUTSIDE
