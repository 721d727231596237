"""Copyright (c) 2023 Genome Research Ltd.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

import math

import pytest
from pytest_cases import parametrize_with_cases

from photon_window.errors import DivergentTerm, InvalidParameter
from photon_window.formulas import (
    RatePrediction,
    emission_rate_strong_drive,
    mean_tau_rg,
    mean_tau_rg_detuned,
    overlap_warnings,
)
from photon_window.model import Regime
from photon_window.series import (
    bessel_zeros,
    lorentz_sum,
    saturated_lorentz_sum,
)


def test_mean_tau_rg_without_modulation() -> None:
    prediction = mean_tau_rg(0.0, 0.5, 0.1)
    assert prediction.mean_tau == pytest.approx(0.5 / 0.1**2, rel=1e-12)
    assert prediction.regime is Regime.WEAK_DRIVE
    assert prediction.validity_warnings == []


def test_mean_tau_rg_value() -> None:
    xi, gamma, rabi = 2.0, 0.5, 0.1
    prediction = mean_tau_rg(xi, gamma, rabi)
    assert prediction.inverse_tau == pytest.approx(
        gamma * rabi**2 * lorentz_sum(xi, gamma), rel=1e-15
    )


def test_detuned_matches_weak_at_zero_detuning() -> None:
    weak = mean_tau_rg(1.3, 0.5, 0.1)
    detuned = mean_tau_rg_detuned(1.3, 0.5, 0.1, 0.0)
    assert detuned.inverse_tau == weak.inverse_tau


def test_mean_tau_rg_regime_warning() -> None:
    prediction = mean_tau_rg(1.0, 0.5, 0.4)
    assert prediction.regime is Regime.OUTSIDE
    assert any("WeakDrive" in w for w in prediction.validity_warnings)


def test_mean_tau_rg_zero_gamma() -> None:
    with pytest.raises(DivergentTerm):
        mean_tau_rg(1.0, 0.0, 0.1)


def test_emission_destroyed_at_bessel_zero() -> None:
    xi = float(bessel_zeros(1, 1)[0])
    on = mean_tau_rg_detuned(xi, 0.01, 0.001, 1.0).inverse_tau
    off = mean_tau_rg_detuned(1.0, 0.01, 0.001, 1.0).inverse_tau
    assert on < 1e-3 * off


def test_strong_drive_without_modulation() -> None:
    gamma, rabi = 0.5, 0.3
    rate = emission_rate_strong_drive(0.0, gamma, rabi).inverse_tau
    w = rabi * rabi
    assert rate == gamma * w / (gamma * gamma + 2.0 * w)


def test_strong_drive_peaks_at_integer_detuning() -> None:
    gamma = 1.0 / 7.0
    rabi = 0.29 * gamma
    rates = {
        delta: emission_rate_strong_drive(1.14, gamma, rabi, delta)
        .inverse_tau
        for delta in (-1.0, -0.5, 0.0, 0.5, 1.0)
    }
    assert rates[0.0] > rates[0.5] < rates[1.0]
    assert rates[0.0] > rates[-0.5] < rates[-1.0]


def test_strong_drive_requires_decay() -> None:
    with pytest.raises(InvalidParameter):
        emission_rate_strong_drive(1.0, 0.0, 0.1)


def test_overlap_warnings() -> None:
    assert overlap_warnings(1.14, 1.0 / 7.0, 0.04) == []
    warnings = overlap_warnings(1.14, 0.8, 0.04)
    assert len(warnings) == 1 and "gamma" in warnings[0]
    assert overlap_warnings(0.0, 0.1, 0.9, threshold=0.5)


def test_zero_rate_prediction() -> None:
    prediction = RatePrediction(inverse_tau=0.0, regime=Regime.OUTSIDE)
    assert math.isinf(prediction.mean_tau)


class SpectrumCases:
    def case_weak_drive(self):
        return 1.14, 1.0 / 7.0, 0.29 / 7.0

    def case_strong_drive(self):
        return 1.14, 1.0 / 7.0, 3.2 / 7.0

    def case_first_zero(self):
        return 2.404825557695773, 0.5, 0.3

    def case_without_modulation(self):
        return 0.0, 0.5, 0.3


DETUNINGS = (0.0, 0.25, 0.5, 1.0, 1.3, 2.0)


@parametrize_with_cases("xi,gamma,rabi", cases=SpectrumCases)
def test_strong_drive_reflection(xi, gamma, rabi) -> None:
    for delta in DETUNINGS:
        plus = emission_rate_strong_drive(xi, gamma, rabi, delta)
        minus = emission_rate_strong_drive(xi, gamma, rabi, -delta)
        assert minus.inverse_tau == pytest.approx(
            plus.inverse_tau, rel=1e-12
        )


@parametrize_with_cases("xi,gamma,rabi", cases=SpectrumCases)
def test_saturation_lowers_rate(xi, gamma, rabi) -> None:
    for delta in DETUNINGS:
        strong = emission_rate_strong_drive(xi, gamma, rabi, delta)
        detuned = mean_tau_rg_detuned(xi, gamma, rabi, delta)
        assert strong.inverse_tau <= detuned.inverse_tau
        assert saturated_lorentz_sum(
            xi, gamma, rabi, delta
        ) <= gamma * rabi**2 * lorentz_sum(xi, gamma, delta) * (1 + 1e-14)
