"""Copyright (c) 2023 Genome Research Ltd.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

import numpy as np
import pytest
import yaml

from photon_window.errors import FitWindowTooNarrow, InvalidParameter
from photon_window.resonance import (
    CriticalPoint,
    ExtremumKind,
    PairState,
    PairTracker,
    critical_exponent_fit,
    extrema_near,
    find_critical_point,
    find_extrema,
    fit_power_law,
    small_gamma_shift,
    stationarity_residual,
    stationarity_slope,
)
from photon_window.series import bessel_j, bessel_zeros, lorentz_sum_dxi

XI_1, XI_2 = 2.404825557695773, 5.520078110286311


def _maxima(gamma, lo, hi):
    return [
        r.xi_star
        for r in find_extrema(gamma, lo, hi)
        if r.kind is ExtremumKind.MAX
    ]


def test_residual_without_decay() -> None:
    assert stationarity_residual(1.7, 0.0) == bessel_j(0, 1.7) * bessel_j(
        1, 1.7
    )


def test_residual_is_scaled_derivative() -> None:
    xi, gamma = 3.3, 0.9
    assert stationarity_residual(xi, gamma) == pytest.approx(
        -0.5 * gamma**2 * lorentz_sum_dxi(xi, gamma), abs=1e-12
    )


def test_residual_negative_gamma() -> None:
    with pytest.raises(InvalidParameter):
        stationarity_residual(1.0, -0.5)


def test_extrema_near_bessel_zeros() -> None:
    records = find_extrema(0.5, 0.5, 8.0)
    maxima = [r for r in records if r.kind is ExtremumKind.MAX]
    assert [r.n for r in maxima][:2] == [1, 2]
    assert maxima[0].xi_star == pytest.approx(XI_1, abs=0.1)
    assert maxima[1].xi_star == pytest.approx(XI_2, abs=0.1)
    minima = [r for r in records if r.kind is ExtremumKind.MIN]
    assert minima and all(
        stationarity_slope(r.xi_star, 0.5) > 0.0 for r in minima
    )
    xs = [r.xi_star for r in records]
    assert xs == sorted(xs)


def test_pairs_present_at_unit_gamma() -> None:
    maxima = _maxima(1.0, 2.0, 6.0)
    assert any(abs(x - XI_1) < 0.5 for x in maxima)
    assert any(abs(x - XI_2) < 0.5 for x in maxima)


def test_pairs_absent_at_large_gamma() -> None:
    maxima = _maxima(2.5, 2.0, 6.0)
    assert not any(abs(x - XI_1) < 0.5 for x in maxima)
    assert not any(abs(x - XI_2) < 0.5 for x in maxima)


def test_find_extrema_range() -> None:
    with pytest.raises(InvalidParameter):
        find_extrema(0.5, 3.0, 2.0)
    with pytest.raises(InvalidParameter):
        find_extrema(0.0, 1.0, 2.0)


def test_small_gamma_shift() -> None:
    gamma = 0.05
    xi_max = _maxima(gamma, 2.0, 3.0)[0]
    shift = small_gamma_shift(1, gamma)
    assert xi_max - XI_1 == pytest.approx(shift, rel=0.05)
    assert small_gamma_shift(1, 0.0) == 0.0
    with pytest.raises(InvalidParameter):
        small_gamma_shift(0, 0.1)


def test_pair_tracker_follows_maximum() -> None:
    tracker = PairTracker(1)
    states = [
        s for s in tracker.follow([0.1, 0.5, 1.0]) if isinstance(s, PairState)
    ]
    assert [s.gamma for s in states] == pytest.approx([0.1, 0.5, 1.0])
    for state in states:
        assert state.left < state.xi_max < state.right
        maxima = _maxima(state.gamma, 1.5, 3.5)
        nearest = min(maxima, key=lambda x: abs(x - XI_1))
        assert state.xi_max == pytest.approx(nearest, abs=1e-8)


@pytest.fixture(scope="module", params=[1, 2])
def critical(request) -> CriticalPoint:
    return find_critical_point(request.param)


def test_critical_point(critical) -> None:
    assert 1.0 < critical.gamma_cr < 2.5
    assert max(abs(r) for r in critical.residuals) <= 1e-6
    assert critical.partner in ("left", "right")
    zeros = bessel_zeros(0, critical.n)
    assert abs(critical.xi_cr - zeros[-1]) < 1.5


def test_pair_merges_at_fold(critical) -> None:
    below = extrema_near(critical.xi_cr, critical.gamma_cr - 1e-6)
    kinds = [r.kind for r in below]
    assert sorted(kinds) == [ExtremumKind.MAX, ExtremumKind.MIN]
    maximum, minimum = sorted(
        below, key=lambda r: r.kind is ExtremumKind.MIN
    )
    if critical.partner == "left":
        assert minimum.xi_star < maximum.xi_star
    else:
        assert maximum.xi_star < minimum.xi_star
    assert extrema_near(critical.xi_cr, critical.gamma_cr + 1e-6) == []


def test_critical_exponent(critical) -> None:
    fit = critical_exponent_fit(critical.n, critical)
    assert fit.beta == pytest.approx(0.5, abs=0.05)
    assert fit.points >= 5
    assert fit.acceptable


def test_fit_power_law() -> None:
    x = np.logspace(-4, -1, 8)
    fit = fit_power_law(x, 3.0 * np.sqrt(x))
    assert fit.beta == pytest.approx(0.5, abs=1e-12)
    assert fit.rms_residual < 1e-12
    assert fit.window == pytest.approx((x.min(), x.max()))
    assert fit.acceptable


def test_fit_power_law_scattered() -> None:
    x = np.logspace(-4, -1, 8)
    y = np.sqrt(x) * np.exp(0.1 * (-1.0) ** np.arange(8))
    fit = fit_power_law(x, y)
    assert fit.rms_residual > 0.02
    assert not fit.acceptable


def test_fit_power_law_too_narrow() -> None:
    with pytest.raises(FitWindowTooNarrow):
        fit_power_law([0.1, 0.2, 0.3], [1.0, 2.0, 3.0])


def test_extrema_command(cli) -> None:
    result = cli.invoke(
        ["extrema", "--gamma", "0.5", "--xi-lo", "2", "--xi-hi", "3"]
    )
    assert result.exit_code == 0
    records = yaml.safe_load(result.stdout)
    assert [r["kind"] for r in records] == ["max"]
    assert records[0]["xi_star"] == pytest.approx(XI_1, abs=0.1)
