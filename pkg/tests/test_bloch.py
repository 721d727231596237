"""Copyright (c) 2023 Genome Research Ltd.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

import numpy as np
import pytest
from pytest_cases import parametrize_with_cases

from photon_window.bloch import (
    GROUND,
    DensityMatrix,
    bloch_rhs,
    emission_spectrum_bloch,
    evolve_bloch,
    period_averaged_population,
    stationary_population,
)
from photon_window.errors import InvalidParameter
from photon_window.formulas import (
    emission_rate_strong_drive,
    mean_tau_rg_detuned,
)
from photon_window.model import ScaledParams


def test_rhs_at_ground() -> None:
    p = ScaledParams.create(gamma=0.5, rabi=0.2, xi=1.0)
    d = bloch_rhs(0.0, GROUND, p)
    assert d.rho_ee == 0.0
    assert d.rho_eg == pytest.approx(-0.1j)


def test_density_matrix() -> None:
    rho = DensityMatrix(rho_ee=0.25, rho_eg=0.1 + 0.2j)
    assert rho.rho_gg == 0.75
    assert rho.is_physical()
    assert DensityMatrix.from_vector(rho.to_vector()) == rho
    assert not DensityMatrix(rho_ee=0.5, rho_eg=0.6).is_physical()


def test_relaxes_to_stationary_state() -> None:
    p = ScaledParams.create(gamma=0.5, rabi=0.3, detuning=0.2)
    trajectory = evolve_bloch(p, np.linspace(0.0, 200.0, 401))
    assert trajectory.rho_ee[-1] == pytest.approx(
        stationary_population(0.5, 0.3, 0.2), rel=1e-6
    )
    assert all(rho.is_physical() for rho in trajectory.states)


@pytest.mark.parametrize("detuning", [0.0, 0.4])
def test_period_average_without_modulation(detuning) -> None:
    p = ScaledParams.create(gamma=0.5, rabi=0.3, detuning=detuning)
    assert period_averaged_population(p) == pytest.approx(
        stationary_population(0.5, 0.3, detuning), rel=1e-6
    )


def test_saturated_rate_without_modulation() -> None:
    gamma, rabi = 0.5, 0.3
    p = ScaledParams.create(gamma=gamma, rabi=rabi)
    rate = gamma * period_averaged_population(p)
    expected = emission_rate_strong_drive(0.0, gamma, rabi).inverse_tau
    assert rate == pytest.approx(expected, rel=1e-6)


def test_weak_drive_rate() -> None:
    p = ScaledParams.create(gamma=0.5, rabi=0.02, xi=1.0, detuning=0.3)
    rate = p.gamma * period_averaged_population(p)
    expected = mean_tau_rg_detuned(1.0, 0.5, 0.02, 0.3).inverse_tau
    assert rate == pytest.approx(expected, rel=0.01)


def test_requires_decay() -> None:
    with pytest.raises(InvalidParameter):
        period_averaged_population(ScaledParams.create(rabi=0.1))


def test_emission_spectrum() -> None:
    p = ScaledParams.create(gamma=1.0 / 7.0, rabi=0.29 / 7.0, xi=1.14)
    rates = emission_spectrum_bloch(p, [-0.5, 0.0, 0.5, 1.0])
    assert rates.shape == (4,)
    assert rates[1] > rates[0] and rates[1] > rates[2] < rates[3]


def test_emission_spectrum_grid() -> None:
    p = ScaledParams.create(gamma=0.5, rabi=0.1)
    with pytest.raises(InvalidParameter):
        emission_spectrum_bloch(p, [0.0, np.nan])


class ReflectionCases:
    def case_sideband(self):
        return 1.14, 1.0 / 7.0, 0.29 / 7.0, 1.0

    def case_between_sidebands(self):
        return 1.14, 1.0 / 7.0, 3.2 / 7.0, 0.5

    def case_first_zero(self):
        return 2.404825557695773, 0.5, 0.2, 1.3


@parametrize_with_cases("xi,gamma,rabi,delta", cases=ReflectionCases)
def test_period_average_reflection(xi, gamma, rabi, delta) -> None:
    p = ScaledParams.create(gamma=gamma, rabi=rabi, xi=xi, detuning=delta)
    mirrored = p.replace(detuning=-delta)
    assert period_averaged_population(mirrored) == pytest.approx(
        period_averaged_population(p), rel=1e-6
    )


def test_linear_response_spectrum() -> None:
    gamma = 1.0 / 7.0
    rabi = 0.05 * gamma
    p = ScaledParams.create(gamma=gamma, rabi=rabi, xi=1.14)
    grid = np.linspace(-2.0, 2.0, 17)
    rates = emission_spectrum_bloch(p, grid)
    expected = [
        mean_tau_rg_detuned(1.14, gamma, rabi, float(d)).inverse_tau
        for d in grid
    ]
    np.testing.assert_allclose(rates, expected, rtol=0.05)
