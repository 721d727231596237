"""Copyright (c) 2023 Genome Research Ltd.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

import math

import pytest
from pydantic import ValidationError
from pytest_cases import parametrize_with_cases

from photon_window.errors import NonPositiveFrequency
from photon_window.model import (
    PhysicalParams,
    Regime,
    ScaledParams,
    classify_regime,
    scale_to_rf_units,
)


def test_scale_to_rf_units() -> None:
    physical = PhysicalParams.from_cyclic(omega_rf=140.0, gamma=20.0)
    assert physical.omega_rf == pytest.approx(2e6 * math.pi * 140.0)
    scaled = scale_to_rf_units(physical)
    assert scaled.gamma == pytest.approx(1.0 / 7.0, rel=1e-15)
    assert scaled.rabi == 0.0


def test_scale_rejects_zero_frequency() -> None:
    with pytest.raises(NonPositiveFrequency):
        scale_to_rf_units(PhysicalParams(omega_rf=0.0, gamma=1.0))


class ScaleCases:
    def case_milli(self):
        return 1e-3

    def case_seven(self):
        return 7.0

    def case_mega(self):
        return 1e6


@parametrize_with_cases("factor", cases=ScaleCases)
def test_scale_is_homogeneous(factor) -> None:
    physical = PhysicalParams.from_cyclic(
        omega_rf=140.0,
        gamma=20.0,
        rabi=5.8,
        detuning=-35.0,
        v_g=12.0,
        v_e=171.6,
    )
    scaled = scale_to_rf_units(physical)
    stretched = scale_to_rf_units(
        PhysicalParams(
            **{k: factor * v for k, v in physical.dict().items()}
        )
    )
    for field, value in scaled.dict().items():
        assert getattr(stretched, field) == pytest.approx(
            value, rel=1e-14, abs=0.0
        )
    assert stretched.xi == pytest.approx(scaled.xi, rel=1e-14)


def test_xi_is_coupling_difference() -> None:
    p = ScaledParams(gamma=0.5, v_g=0.25, v_e=1.5)
    assert p.xi == 1.25
    moved = p.replace(xi=2.0)
    assert moved.v_g == 0.25
    assert moved.xi == 2.0


def test_create() -> None:
    p = ScaledParams.create(gamma=0.5, rabi=0.1, xi=2.0, v_g=1.0)
    assert (p.v_g, p.v_e) == (1.0, 3.0)


@pytest.mark.parametrize("field", ["gamma", "rabi"])
def test_negative_rates(field) -> None:
    with pytest.raises(ValidationError):
        ScaledParams(**{field: -0.1})


def test_non_finite() -> None:
    with pytest.raises(ValidationError):
        ScaledParams(gamma=math.nan)


def test_unknown_field() -> None:
    with pytest.raises(ValidationError):
        ScaledParams(omega=1.0)


class RegimeCases:
    def case_weak(self):
        return 0.5, 0.1, Regime.WEAK_DRIVE

    def case_strong(self):
        return 1.0 / 7.0, 0.457, Regime.STRONG_DRIVE

    def case_between_regimes(self):
        return 1.0 / 7.0, 0.29 / 7.0, Regime.OUTSIDE

    def case_rabi_above_ceiling(self):
        return 0.5, 0.9, Regime.OUTSIDE


@parametrize_with_cases("gamma,rabi,regime", cases=RegimeCases)
def test_classify_regime(gamma, rabi, regime) -> None:
    p = ScaledParams.create(gamma=gamma, rabi=rabi)
    assert classify_regime(p) is regime


def test_classify_regime_thresholds() -> None:
    p = ScaledParams.create(gamma=0.5, rabi=0.2)
    assert classify_regime(p) is Regime.OUTSIDE
    assert classify_regime(p, weak=0.4) is Regime.WEAK_DRIVE
