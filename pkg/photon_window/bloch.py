"""Copyright (c) 2023 Genome Research Ltd.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.

Optical Bloch equations with an rf-modulated detuning Δ(t) = δ + ξ cos t.

    ρ_ee' = −Γ ρ_ee − Ω Im ρ_eg
    ρ_eg' = −(Γ/2 + iΔ) ρ_eg − (iΩ/2)(1 − 2ρ_ee)

Written for x = (ρ_ee, Re ρ_eg, Im ρ_eg) the system is affine, x' = A(t)x + c,
with a 2π-periodic A, so the periodic steady state follows from a single
period of the fundamental matrix.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import simpson, solve_ivp

from .app import app
from .errors import InvalidParameter, NoConvergence, StepSizeUnderflow
from .logger import get_logger
from .model import ScaledParams

logger = get_logger(__name__)

PERIOD = 2.0 * math.pi


@dataclass(frozen=True)
class DensityMatrix:
    """Two-level density matrix; ρ_gg = 1 − ρ_ee and ρ_ge = conj(ρ_eg)."""

    rho_ee: float
    rho_eg: complex

    @property
    def rho_gg(self) -> float:
        """Ground state population."""
        return 1.0 - self.rho_ee

    def is_physical(self, slack: float = 1e-9) -> bool:
        """Check 0 ≤ ρ_ee ≤ 1 and |ρ_eg|² ≤ ρ_ee(1 − ρ_ee)."""
        return (
            -slack <= self.rho_ee <= 1.0 + slack
            and abs(self.rho_eg) ** 2
            <= self.rho_ee * (1.0 - self.rho_ee) + slack
        )

    def to_vector(self) -> NDArray[np.float64]:
        """Real coordinates (ρ_ee, Re ρ_eg, Im ρ_eg)."""
        return np.array([self.rho_ee, self.rho_eg.real, self.rho_eg.imag])

    @classmethod
    def from_vector(cls, x: ArrayLike) -> "DensityMatrix":
        """Build from real coordinates."""
        ee, re, im = np.asarray(x, dtype=float)
        return cls(rho_ee=float(ee), rho_eg=complex(re, im))


GROUND = DensityMatrix(rho_ee=0.0, rho_eg=0.0j)


@dataclass(frozen=True)
class BlochTrajectory:
    """Sampled Bloch evolution."""

    times: NDArray[np.float64]
    rho_ee: NDArray[np.float64]
    rho_eg: NDArray[np.complex128]

    @property
    def states(self) -> list[DensityMatrix]:
        """Density matrices at every sample time."""
        return [
            DensityMatrix(rho_ee=float(ee), rho_eg=complex(eg))
            for ee, eg in zip(self.rho_ee, self.rho_eg)
        ]


def _generator(t: float, p: ScaledParams) -> NDArray[np.float64]:
    delta = p.detuning + p.xi * math.cos(t)
    g, w = p.gamma, p.rabi
    return np.array(
        [
            [-g, 0.0, -w],
            [0.0, -0.5 * g, delta],
            [w, -delta, -0.5 * g],
        ]
    )


def _drive(p: ScaledParams) -> NDArray[np.float64]:
    return np.array([0.0, 0.0, -0.5 * p.rabi])


def bloch_rhs(
    t: float, rho: DensityMatrix, p: ScaledParams
) -> DensityMatrix:
    """Time derivative of the density matrix.

    Args:
        t: Time in rf units.
        rho: Current state.
        p: Scaled parameters; ξ modulates the detuning.

    Returns:
        DensityMatrix: (ρ_ee', ρ_eg') packed as a density matrix.
    """
    dx = _generator(t, p) @ rho.to_vector() + _drive(p)
    return DensityMatrix.from_vector(dx)


def _solve(
    fun: Callable[[float, NDArray], NDArray],
    span: tuple[float, float],
    y0: NDArray,
    times: NDArray,
    tol: float,
) -> NDArray:
    sol = solve_ivp(
        fun,
        span,
        y0,
        method="RK45",
        t_eval=times,
        rtol=tol,
        atol=min(app.settings.dynamics.atol, tol * 1e-3),
    )
    if sol.status == -1:
        raise StepSizeUnderflow(sol.message)
    return sol.y.T


def evolve_bloch(
    p: ScaledParams,
    times: ArrayLike,
    rho0: DensityMatrix = GROUND,
    tol: Optional[float] = None,
) -> BlochTrajectory:
    """Integrate the Bloch equations.

    Args:
        p: Scaled parameters.
        times: Increasing sample times; the first is the initial time.
        rho0: Initial state, the ground state by default.
        tol: Relative tolerance, dynamics.rtol by default.

    Returns:
        BlochTrajectory: Sampled populations and coherences.
    """
    times = np.asarray(times, dtype=float)
    tol = app.settings.dynamics.rtol if tol is None else tol
    c = _drive(p)
    x = _solve(
        lambda t, y: _generator(t, p) @ y + c,
        (float(times[0]), float(times[-1])),
        rho0.to_vector(),
        times,
        tol,
    )
    return BlochTrajectory(
        times=times, rho_ee=x[:, 0], rho_eg=x[:, 1] + 1j * x[:, 2]
    )


def stationary_population(
    gamma: float, rabi: float, detuning: float = 0.0
) -> float:
    """Steady-state ρ_ee = (Ω²/4) / (δ² + Γ²/4 + Ω²/2) without modulation."""
    w = 0.25 * rabi * rabi
    return w / (detuning * detuning + 0.25 * gamma * gamma + 2.0 * w)


def _periodic_state(p: ScaledParams, tol: float) -> NDArray[np.float64]:
    """Initial state of the 2π-periodic solution, x* = (I − Y)⁻¹ z."""
    c = _drive(p)

    def fun(t: float, y: NDArray) -> NDArray:
        m = y.reshape(3, 4)
        dm = _generator(t, p) @ m
        dm[:, 3] += c
        return dm.ravel()

    y0 = np.hstack([np.eye(3), np.zeros((3, 1))]).ravel()
    end = _solve(fun, (0.0, PERIOD), y0, np.array([PERIOD]), tol)[-1]
    m = end.reshape(3, 4)
    return np.linalg.solve(np.eye(3) - m[:, :3], m[:, 3])


def period_averaged_population(
    p: ScaledParams,
    tol: Optional[float] = None,
    samples: Optional[int] = None,
    max_periods: Optional[int] = None,
) -> float:
    """(1/2π) ∫ ρ_ee dt over one period of the periodic steady state.

    Period averages are computed by Simpson's rule from the fixed point of
    the one-period map until two successive averages differ by less than
    tol.

    Args:
        p: Scaled parameters with gamma > 0.
        tol: Convergence tolerance, bloch.tol by default.
        samples: Intervals per period, bloch.samples_per_period by default.
        max_periods: Period limit, bloch.max_periods by default.

    Returns:
        float: Period-averaged excited state population.

    Raises:
        NoConvergence: Averages did not settle within max_periods.
    """
    config = app.settings.bloch
    tol = config.tol if tol is None else tol
    samples = samples or config.samples_per_period
    max_periods = max_periods or config.max_periods
    if not p.gamma > 0:
        raise InvalidParameter(f"gamma must be positive, got {p.gamma}")
    ode_tol = min(app.settings.dynamics.rtol, tol * 1e-2)
    x = _periodic_state(p, ode_tol)
    s = np.linspace(0.0, PERIOD, samples + 1)
    previous = math.nan
    for period in range(max_periods):
        trajectory = evolve_bloch(
            p, s, DensityMatrix.from_vector(x), tol=ode_tol
        )
        average = float(simpson(trajectory.rho_ee, x=s) / PERIOD)
        if abs(average - previous) < tol:
            logger.debug(
                "Period average %.12g after %d periods (delta=%g)",
                average,
                period + 1,
                p.detuning,
            )
            return average
        previous = average
        x = np.array(
            [
                trajectory.rho_ee[-1],
                trajectory.rho_eg[-1].real,
                trajectory.rho_eg[-1].imag,
            ]
        )
    raise NoConvergence(
        f"period average not settled after {max_periods} periods"
    )


def emission_spectrum_bloch(
    p: ScaledParams, delta_grid: ArrayLike, tol: Optional[float] = None
) -> NDArray[np.float64]:
    """Emission rate Γ·ρ̄_ee at each detuning.

    Args:
        p: Scaled parameters; the detuning is replaced by each grid value.
        delta_grid: Detunings δ.
        tol: Convergence tolerance of the period average.

    Returns:
        ndarray: Rates, one per grid value.
    """
    grid = np.asarray(delta_grid, dtype=float)
    if not np.all(np.isfinite(grid)):
        raise InvalidParameter("delta grid must be finite")
    return np.array(
        [
            p.gamma
            * period_averaged_population(p.replace(detuning=float(d)), tol)
            for d in grid
        ]
    )
