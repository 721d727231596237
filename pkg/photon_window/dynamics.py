"""Copyright (c) 2023 Genome Research Ltd.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.

Conditional (no-emission) evolution of the driven two-level molecule.

The molecule starts in the ground state, (psi_g, psi_e) = (1, 0), and
evolves under the non-Hermitian Hamiltonian

    i psi_g' = V_g cos(t) psi_g + (Ω/2) psi_e
    i psi_e' = (Ω/2) psi_g + (V_e cos(t) − iΓ/2 + δ) psi_e

so that the norm of the state is the survival probability P₀(t) and the
mean waiting time for the first photon is the integral of P₀.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import simpson, solve_ivp
from scipy.linalg import solve_discrete_lyapunov
from scipy.stats import linregress

from .app import app
from .errors import (
    DivergentWaitingTime,
    InvalidParameter,
    NoConvergence,
    StepSizeUnderflow,
)
from .logger import get_logger
from .model import Regime, ScaledParams, classify_regime
from .series import lorentz_sum, series_row

logger = get_logger(__name__)

PERIOD = 2.0 * math.pi
# Largest Γt/2 kept in the weak-drive amplitude substitution.
_MAX_GROWTH = 700.0
# Cap on points held by a Floquet survival grid.
_MAX_GRID_POINTS = 1 << 22


@dataclass(frozen=True)
class StateVector:
    """Conditional wavefunction amplitudes."""

    psi_g: complex
    psi_e: complex

    def norm(self) -> float:
        """Survival probability |psi_g|² + |psi_e|²."""
        return abs(self.psi_g) ** 2 + abs(self.psi_e) ** 2

    def to_array(self) -> NDArray[np.complex128]:
        """Amplitudes as a length-2 complex array."""
        return np.array([self.psi_g, self.psi_e], dtype=complex)

    @classmethod
    def from_array(cls, values: ArrayLike) -> "StateVector":
        """Build a state from two complex amplitudes."""
        g, e = np.asarray(values, dtype=complex)
        return cls(psi_g=complex(g), psi_e=complex(e))


GROUND = StateVector(psi_g=1.0 + 0.0j, psi_e=0.0j)


@dataclass(frozen=True)
class Trajectory:
    """Sampled conditional evolution with its survival probability."""

    times: NDArray[np.float64]
    psi: NDArray[np.complex128]
    survival: NDArray[np.float64] = field(init=False)

    def __post_init__(self) -> None:
        """Derive the survival probability from the amplitudes."""
        survival = np.sum(np.abs(self.psi) ** 2, axis=1)
        object.__setattr__(self, "survival", survival)

    @property
    def states(self) -> list[StateVector]:
        """States at every sample time."""
        return [StateVector.from_array(row) for row in self.psi]

    def __len__(self) -> int:
        return len(self.times)

    def to_frame(self) -> pd.DataFrame:
        """Tabulate the trajectory.

        Returns:
            DataFrame: Columns t, re/im of both amplitudes and survival.
        """
        return pd.DataFrame(
            {
                "t": self.times,
                "psi_g_re": self.psi[:, 0].real,
                "psi_g_im": self.psi[:, 0].imag,
                "psi_e_re": self.psi[:, 1].real,
                "psi_e_im": self.psi[:, 1].imag,
                "survival": self.survival,
            }
        )


@dataclass(frozen=True)
class AnalyticSolution:
    """Renormalized weak-drive solution, defined by its decay rate."""

    zeta: float
    params: ScaledParams

    @property
    def mean_waiting_time(self) -> float:
        """Leading-order ⟨τ⟩ = 1/(2ζ)."""
        return math.inf if self.zeta == 0.0 else 1.0 / (2.0 * self.zeta)


def _hamiltonian(t: float, p: ScaledParams) -> NDArray[np.complex128]:
    c = math.cos(t)
    half = 0.5 * p.rabi
    return np.array(
        [
            [p.v_g * c, half],
            [half, p.v_e * c - 0.5j * p.gamma + p.detuning],
        ]
    )


def rhs_schrodinger(t: float, s: StateVector, p: ScaledParams) -> StateVector:
    """Time derivative of the conditional wavefunction.

    Args:
        t: Time in rf units.
        s: Current state.
        p: Scaled parameters.

    Returns:
        StateVector: d/dt (psi_g, psi_e) = −iHψ.
    """
    return StateVector.from_array(-1j * (_hamiltonian(t, p) @ s.to_array()))


def _tolerances(tol: Optional[float]) -> tuple[float, float]:
    rtol = app.settings.dynamics.rtol if tol is None else tol
    if not rtol > 0:
        raise InvalidParameter(f"tol must be positive, got {rtol}")
    atol = min(app.settings.dynamics.atol, rtol)
    return rtol, atol


def _integrate(
    derivative: Callable[[float, NDArray[np.complex128]], NDArray],
    y0: NDArray[np.complex128],
    t_end: float,
    times: NDArray[np.float64],
    tol: Optional[float],
) -> NDArray[np.complex128]:
    """Integrate a complex linear system as real components with RK45.

    Returns:
        ndarray: Complex solution, one row per requested time.
    """
    rtol, atol = _tolerances(tol)
    shape = y0.shape

    def fun(t: float, y: NDArray[np.float64]) -> NDArray[np.float64]:
        z = derivative(t, y.view(complex).reshape(shape))
        return np.ascontiguousarray(z, dtype=complex).ravel().view(float)

    y = np.ascontiguousarray(y0, dtype=complex).ravel().view(float)
    sol = solve_ivp(
        fun,
        (0.0, t_end),
        y,
        method="RK45",
        t_eval=times,
        rtol=rtol,
        atol=atol,
    )
    if sol.status == -1:
        raise StepSizeUnderflow(sol.message)
    values = np.ascontiguousarray(sol.y.T).view(complex)
    return values.reshape((len(times),) + shape)


def sample_times(t_end: float, spacing: Optional[float] = None) -> NDArray:
    """Uniform sample times on [0, t_end], both ends included.

    Args:
        t_end: Final time, positive.
        spacing: Target spacing, dynamics.sample_spacing by default.

    Returns:
        ndarray: Increasing sample times.
    """
    if not t_end > 0:
        raise InvalidParameter(f"t_end must be positive, got {t_end}")
    if spacing is None:
        spacing = app.settings.dynamics.sample_spacing
    count = max(2, int(math.ceil(t_end / spacing)) + 1)
    return np.linspace(0.0, t_end, count)


def _check_times(t_end: float, times: Optional[ArrayLike]) -> NDArray:
    if times is None:
        return sample_times(t_end)
    times = np.asarray(times, dtype=float)
    if times[0] != 0.0 or times[-1] > t_end or np.any(np.diff(times) <= 0):
        raise InvalidParameter("times must increase from 0 to at most t_end")
    return times


def evolve(
    p: ScaledParams,
    t_end: float,
    tol: Optional[float] = None,
    times: Optional[ArrayLike] = None,
) -> Trajectory:
    """Integrate the Schrödinger equation from the ground state.

    Args:
        p: Scaled parameters.
        t_end: Final time, positive.
        tol: Relative tolerance, dynamics.rtol by default.
        times: Sample times starting at 0; uniform by default.

    Returns:
        Trajectory: Sampled amplitudes and survival.

    Raises:
        StepSizeUnderflow: The integrator could not keep the error in bound.
    """
    times = _check_times(t_end, times)
    psi = _integrate(
        lambda t, y: -1j * (_hamiltonian(t, p) @ y),
        GROUND.to_array(),
        t_end,
        times,
        tol,
    )
    return Trajectory(times=times, psi=psi)


def evolve_amplitude_basis(
    p: ScaledParams,
    t_end: float,
    tol: Optional[float] = None,
    times: Optional[ArrayLike] = None,
    form: Optional[str] = None,
) -> Trajectory:
    """Integrate the slowly varying amplitudes c_g, c_e.

    The weak-drive form removes the rf phases and the excited state decay,
    psi_e = c_e exp(−iV_e sin t − Γt/2), and needs δ = 0. The strong-drive
    form removes the rf phases and the detuning, psi_e = c_e exp(−iV_e sin t
    − iδt), keeping the decay in the equations. In both forms
    psi_g = c_g exp(−iV_g sin t) and exp(±iξ sin t) is expanded in the
    truncated Bessel series.

    Args:
        p: Scaled parameters.
        t_end: Final time, positive.
        tol: Relative tolerance.
        times: Sample times starting at 0.
        form: "weak" or "strong"; "strong" when δ ≠ 0, else "weak".

    Returns:
        Trajectory: Amplitudes transformed back to psi_g, psi_e.
    """
    form = form or ("strong" if p.detuning else "weak")
    if form not in ("weak", "strong"):
        raise InvalidParameter(f"unknown amplitude form {form!r}")
    if form == "weak" and p.detuning != 0.0:
        raise InvalidParameter("the weak-drive form requires detuning 0")
    if form == "weak" and 0.5 * p.gamma * t_end > _MAX_GROWTH:
        raise InvalidParameter(
            f"gamma·t_end/2 = {0.5 * p.gamma * t_end:g} overflows the "
            "weak-drive amplitude basis"
        )
    times = _check_times(t_end, times)
    row = series_row(p.xi)
    k = row.orders
    bessel = row.values
    half = 0.5 * p.rabi
    gamma = p.gamma
    delta = p.detuning

    if form == "weak":

        def derivative(t: float, c: NDArray) -> NDArray:
            series = bessel @ np.exp(1j * k * t)
            grow = math.exp(0.5 * gamma * t)
            return np.array(
                [
                    -1j * half * c[1] * np.conj(series) / grow,
                    -1j * half * c[0] * series * grow,
                ]
            )

    else:

        def derivative(t: float, c: NDArray) -> NDArray:
            series = bessel @ np.exp(1j * (k + delta) * t)
            return np.array(
                [
                    -1j * half * c[1] * np.conj(series),
                    -1j * half * c[0] * series - 0.5 * gamma * c[1],
                ]
            )

    c = _integrate(derivative, GROUND.to_array(), t_end, times, tol)
    psi = np.empty_like(c)
    sin = np.sin(times)
    psi[:, 0] = c[:, 0] * np.exp(-1j * p.v_g * sin)
    if form == "weak":
        psi[:, 1] = c[:, 1] * np.exp(-1j * p.v_e * sin - 0.5 * gamma * times)
    else:
        psi[:, 1] = c[:, 1] * np.exp(-1j * (p.v_e * sin + delta * times))
    return Trajectory(times=times, psi=psi)


class FloquetPropagator:
    """One-period propagator U(s), s ∈ [0, 2π], and its monodromy M.

    The Hamiltonian is 2π-periodic, so psi(2πn + s) = U(s) Mⁿ psi(0) with
    M = U(2π). One integration over a single period therefore yields the
    state at any time.
    """

    def __init__(
        self,
        p: ScaledParams,
        samples: Optional[int] = None,
        tol: Optional[float] = None,
    ) -> None:
        """Constructor.

        Args:
            p: Scaled parameters.
            samples: Intervals per period, a power of two; the finest
                quadrature resolution by default.
            tol: Relative tolerance of the period integration.
        """
        self.params = p
        self.samples = samples or app.settings.dynamics.max_samples_per_period
        if self.samples < 2 or self.samples & (self.samples - 1):
            raise InvalidParameter(
                f"samples must be a power of two, got {self.samples}"
            )
        self.s = np.linspace(0.0, PERIOD, self.samples + 1)
        self.U = _integrate(
            lambda t, y: -1j * (_hamiltonian(t, p) @ y),
            np.eye(2, dtype=complex),
            PERIOD,
            self.s,
            tol,
        )

    @property
    def monodromy(self) -> NDArray[np.complex128]:
        """M = U(2π)."""
        return self.U[-1]

    @cached_property
    def decay_rate(self) -> float:
        """Asymptotic ζ with P₀ ∝ exp(−2ζt), from the Floquet multipliers."""
        radius = float(np.max(np.abs(np.linalg.eigvals(self.monodromy))))
        return -math.log(radius) / PERIOD if radius > 0.0 else math.inf

    def period_gram(self, samples: Optional[int] = None) -> NDArray:
        """Q = ∫₀^{2π} U(s)†U(s) ds by Simpson's rule.

        Args:
            samples: Intervals used, a power of two dividing the grid.

        Returns:
            ndarray: Hermitian 2×2 matrix.
        """
        samples = samples or self.samples
        stride = self.samples // samples
        U = self.U[::stride]
        integrand = np.einsum("sji,sjk->sik", U.conj(), U)
        return simpson(integrand, x=self.s[::stride], axis=0)

    def period_states(
        self, psi0: NDArray, tail_tol: float, max_periods: int
    ) -> NDArray[np.complex128]:
        """States φ_n = Mⁿ psi0 at period boundaries.

        Iteration stops at the first n with |φ_n|² < tail_tol, which is the
        last row returned.

        Raises:
            DivergentWaitingTime: The state does not decay.
            NoConvergence: max_periods were iterated first.
        """
        if self.decay_rate <= 0.0:
            raise DivergentWaitingTime("survival probability does not decay")
        M = self.monodromy
        phi = np.asarray(psi0, dtype=complex)
        states = [phi]
        while np.vdot(phi, phi).real >= tail_tol:
            if len(states) > max_periods:
                raise NoConvergence(
                    f"survival above {tail_tol:g} after {max_periods} periods"
                )
            phi = M @ phi
            states.append(phi)
        return np.array(states)


def _tail_rate(times: NDArray, survival: NDArray) -> float:
    """ζ from a log-linear fit over the last decade of decay."""
    last = survival[-1]
    window = np.nonzero(survival <= 10.0 * last)[0]
    if len(window) < 3:
        window = np.arange(max(0, len(survival) - 3), len(survival))
    if len(window) < 2:
        return math.inf
    fit = linregress(times[window], np.log(survival[window]))
    if len(window) > 2:
        predicted = fit.intercept + fit.slope * times[window]
        residual = float(
            np.sqrt(np.mean((np.log(survival[window]) - predicted) ** 2))
        )
        if residual > app.settings.dynamics.tail_fit_residual:
            logger.warning(
                "Tail fit residual %.3g exceeds %.3g; exponential tail "
                "correction may be inaccurate",
                residual,
                app.settings.dynamics.tail_fit_residual,
            )
    return -0.5 * fit.slope


def _require_decay(p: ScaledParams) -> None:
    if p.rabi == 0.0:
        raise DivergentWaitingTime("rabi = 0: the ground state never decays")
    if p.gamma == 0.0:
        raise DivergentWaitingTime("gamma = 0: no photon is ever emitted")


def mean_waiting_time_numeric(
    p: ScaledParams,
    tol: Optional[float] = None,
    tail_tol: Optional[float] = None,
) -> float:
    """⟨τ⟩ = ∫₀^∞ P₀ dt by quadrature of the evolved survival probability.

    Each rf period is integrated with Simpson's rule on the propagator's
    dense output; the number of samples per period doubles until halving
    the step changes ⟨τ⟩ by less than dynamics.halving_tol. Beyond the
    first period boundary with P₀ < tail_tol an exponential tail
    P₀(t_cut)/(2ζ_fit) is added.

    Args:
        p: Scaled parameters.
        tol: Relative tolerance of the integration.
        tail_tol: Survival cutoff, dynamics.tail_tol by default.

    Returns:
        float: Mean waiting time in rf units.

    Raises:
        DivergentWaitingTime: rabi or gamma is zero.
    """
    _require_decay(p)
    config = app.settings.dynamics
    tail_tol = config.tail_tol if tail_tol is None else tail_tol
    propagator = FloquetPropagator(p, config.max_samples_per_period, tol)
    resolutions = []
    samples = config.samples_per_period
    while samples <= config.max_samples_per_period:
        resolutions.append(samples)
        samples *= 2
    grams = np.array([propagator.period_gram(j) for j in resolutions])

    phis = propagator.period_states(
        GROUND.to_array(), tail_tol, config.max_periods
    )
    body = phis[:-1]
    sums = np.einsum("ni,jik,nk->j", body.conj(), grams, body).real
    boundary = np.sum(np.abs(phis) ** 2, axis=1)
    times = PERIOD * np.arange(len(phis))
    zeta = _tail_rate(times, boundary)
    tail = boundary[-1] / (2.0 * zeta) if 0.0 < zeta < math.inf else 0.0
    totals = sums + tail
    logger.debug(
        "Quadrature over %d periods, tail %.3g, resolutions %s: %s",
        len(body),
        tail,
        resolutions,
        totals,
    )
    for coarse, fine in zip(totals, totals[1:]):
        if abs(coarse - fine) < config.halving_tol * abs(fine):
            return float(fine)
    logger.warning(
        "Step halving did not settle below %.1g relative; using %d samples "
        "per period",
        config.halving_tol,
        resolutions[-1],
    )
    return float(totals[-1])


def mean_waiting_time_floquet(
    p: ScaledParams, tol: Optional[float] = None
) -> float:
    """⟨τ⟩ = ψ₀†Xψ₀ with X − M†XM = Q, summing all periods in closed form.

    Args:
        p: Scaled parameters.
        tol: Relative tolerance of the period integration.

    Returns:
        float: Mean waiting time in rf units.

    Raises:
        DivergentWaitingTime: rabi or gamma is zero.
    """
    _require_decay(p)
    propagator = FloquetPropagator(p, tol=tol)
    if propagator.decay_rate <= 0.0:
        raise DivergentWaitingTime("survival probability does not decay")
    M = propagator.monodromy
    X = solve_discrete_lyapunov(M.conj().T, propagator.period_gram())
    psi0 = GROUND.to_array()
    return float(np.vdot(psi0, X @ psi0).real)


def evolve_floquet(
    p: ScaledParams,
    n_periods: Optional[int] = None,
    samples: Optional[int] = None,
    tol: Optional[float] = None,
    tail_tol: Optional[float] = None,
) -> Trajectory:
    """Survival grid built from the one-period propagator.

    Args:
        p: Scaled parameters.
        n_periods: Periods covered; by default until P₀ < tail_tol.
        samples: Intervals per period, dynamics.samples_per_period by
            default; halved while the grid exceeds its size cap.
        tol: Relative tolerance of the period integration.
        tail_tol: Survival cutoff when n_periods is not given.

    Returns:
        Trajectory: Samples on [0, 2π·N] including the final boundary.
    """
    config = app.settings.dynamics
    samples = samples or config.samples_per_period
    propagator = FloquetPropagator(p, samples, tol)
    if n_periods is None:
        _require_decay(p)
        tail_tol = config.tail_tol if tail_tol is None else tail_tol
        phis = propagator.period_states(
            GROUND.to_array(), tail_tol, config.max_periods
        )
    else:
        phis = [GROUND.to_array()]
        for _ in range(n_periods):
            phis.append(propagator.monodromy @ phis[-1])
        phis = np.array(phis)
    periods = len(phis) - 1
    stride = 1
    while periods * samples // stride > _MAX_GRID_POINTS and stride < samples:
        stride *= 2
    if stride > 1:
        logger.debug("Survival grid thinned to %d samples per period",
                     samples // stride)
    U = propagator.U[:-1:stride]
    psi = np.einsum("sij,nj->nsi", U, phis[:-1]).reshape(-1, 2)
    times = (
        PERIOD * np.arange(periods)[:, None]
        + propagator.s[:-1:stride][None, :]
    ).ravel()
    return Trajectory(
        times=np.append(times, PERIOD * periods),
        psi=np.vstack([psi, phis[-1:]]),
    )


def analytic_solution(p: ScaledParams) -> AnalyticSolution:
    """Renormalized decay rate ζ = (Ω²/2)·Γ·S(ξ, Γ, 0).

    Args:
        p: Scaled parameters with gamma > 0.

    Returns:
        AnalyticSolution: ζ with its parameters.
    """
    if classify_regime(p) is not Regime.WEAK_DRIVE:
        logger.warning(
            "Weak-drive solution used outside its regime: gamma=%g rabi=%g",
            p.gamma,
            p.rabi,
        )
    zeta = 0.5 * p.rabi**2 * p.gamma * lorentz_sum(p.xi, p.gamma)
    return AnalyticSolution(zeta=zeta, params=p)


def _analytic_psi(
    solution: AnalyticSolution, times: NDArray
) -> NDArray[np.complex128]:
    p = solution.params
    row = series_row(p.xi)
    k = row.orders
    g = p.gamma
    weights = row.values * (g - 2j * k) / (g * g + 4.0 * k * k)
    t = times[:, None]
    bracket = np.exp(1j * k * t) - np.exp(-0.5 * g * t)
    sin = np.sin(times)
    decay = np.exp(-solution.zeta * times)
    psi = np.empty((len(times), 2), dtype=complex)
    psi[:, 0] = np.exp(-1j * p.v_g * sin) * decay
    psi[:, 1] = (
        -1j * p.rabi * np.exp(-1j * p.v_e * sin) * decay * (bracket @ weights)
    )
    return psi


def analytic_wavefunction(p: ScaledParams, t: float) -> StateVector:
    """Closed-form weak-drive wavefunction at time t.

    Args:
        p: Scaled parameters.
        t: Time, t ≥ 0.

    Returns:
        StateVector: psi_g = exp(−iV_g sin t − ζt) and the Bessel series
        for psi_e.
    """
    if t == 0.0:
        return GROUND
    psi = _analytic_psi(analytic_solution(p), np.array([float(t)]))
    return StateVector.from_array(psi[0])


def analytic_survival(p: ScaledParams, times: ArrayLike) -> NDArray:
    """Closed-form P₀ at the given times.

    Args:
        p: Scaled parameters.
        times: Non-negative times.

    Returns:
        ndarray: Survival probability.
    """
    times = np.asarray(times, dtype=float)
    psi = _analytic_psi(analytic_solution(p), times)
    return np.sum(np.abs(psi) ** 2, axis=1)


def sample_waiting_times(
    p: ScaledParams,
    n: int,
    seed: int,
    tol: Optional[float] = None,
) -> NDArray[np.float64]:
    """Draw first-photon waiting times by inverting F(τ) = 1 − P₀(τ).

    Each uniform u gives the τ with P₀(τ) = 1 − u, found by binary search
    on the monotone survival grid and linear interpolation within the
    bracketing step. Beyond the grid the asymptotic exponential decay is
    inverted.

    Args:
        p: Scaled parameters.
        n: Number of samples, at least one.
        seed: Seed of the random generator.
        tol: Relative tolerance of the period integration.

    Returns:
        ndarray: Waiting times, non-negative.

    Raises:
        DivergentWaitingTime: rabi or gamma is zero.
    """
    _require_decay(p)
    if n < 1:
        raise InvalidParameter(f"n must be at least 1, got {n}")
    trajectory = evolve_floquet(p, tol=tol)
    times = trajectory.times
    survival = np.minimum.accumulate(trajectory.survival)
    target = 1.0 - np.random.default_rng(seed).random(n)

    ascending = survival[::-1]
    index = len(survival) - np.searchsorted(ascending, target, side="right")
    tau = np.empty(n)

    inside = (index > 0) & (index < len(survival))
    i = index[inside]
    upper, lower = survival[i - 1], survival[i]
    drop = upper - lower
    fraction = np.divide(
        upper - target[inside],
        drop,
        out=np.ones_like(drop),
        where=drop > 0.0,
    )
    tau[inside] = times[i - 1] + fraction * (times[i] - times[i - 1])
    tau[index == 0] = 0.0

    beyond = index == len(survival)
    if np.any(beyond):
        zeta = FloquetPropagator(p, tol=tol).decay_rate
        tau[beyond] = times[-1] + np.log(survival[-1] / target[beyond]) / (
            2.0 * zeta
        )
    return tau
