"""Copyright (c) 2023 Genome Research Ltd.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.

Extrema of the weak-drive mean waiting time ⟨τ⟩(ξ) and their annihilation.

Extrema are the zeros of the stationarity residual

    F(ξ, Γ) = J_0 J_1 − Γ² Σ_{k≥1} J_k (J_{k−1} − J_{k+1}) / (Γ² + 4k²)
            = −(Γ²/2) ∂S/∂ξ,

a maximum of ⟨τ⟩ where F crosses zero downwards. As Γ grows each
maximum meets a neighbouring minimum in a fold, where ∂S/∂ξ and ∂²S/∂ξ²
vanish together.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, Union

import numpy as np
import typer
from numpy.typing import ArrayLike
from pydantic import BaseModel
from scipy.optimize import brentq, minimize_scalar, root
from scipy.stats import linregress
from scipy.stats import t as student_t
from typer import Typer
from typing_extensions import Annotated

from .api import API
from .app import app
from .errors import (
    FitWindowTooNarrow,
    InvalidParameter,
    NoConvergence,
    NoPairFound,
)
from .logger import LogMixin, get_logger
from .series import (
    bessel_j,
    bessel_zeros,
    crossing_sum,
    lorentz_sum_derivatives,
)

logger = get_logger(__name__)

# Margin added around the previous gap when searching it at a new Γ.
_WINDOW_PAD = 0.05


class ExtremumKind(str, Enum):
    """Kind of extremum of ⟨τ⟩."""

    MAX = "max"
    MIN = "min"


class ExtremumRecord(BaseModel):
    """A stationary point of ⟨τ⟩(ξ) at fixed Γ."""

    xi_star: float
    kind: ExtremumKind
    gamma: float
    n: int


class CriticalPoint(BaseModel):
    """Fold where the maximum of pair n meets a minimum."""

    xi_cr: float
    gamma_cr: float
    n: int
    partner: str
    residuals: tuple[float, float]


class ExponentFit(BaseModel):
    """Power law y = c·x^β fitted in log–log coordinates."""

    beta: float
    ci_half_width: float
    window: tuple[float, float]
    rms_residual: float
    points: int
    acceptable: bool = True


def stationarity_residual(
    xi: float, gamma: float, tol: Optional[float] = None
) -> float:
    """F(ξ, Γ), zero exactly at the extrema of ⟨τ⟩ in ξ.

    Args:
        xi: Modulation index ξ.
        gamma: Decay rate Γ ≥ 0.
        tol: Series tail tolerance.

    Returns:
        float: The residual.
    """
    if gamma < 0:
        raise InvalidParameter(f"gamma must be non-negative, got {gamma}")
    j0, j1 = bessel_j(0, xi), bessel_j(1, xi)
    if gamma == 0.0:
        return j0 * j1
    return j0 * j1 - gamma * gamma * crossing_sum(xi, gamma, tol)


def stationarity_slope(
    xi: float, gamma: float, tol: Optional[float] = None
) -> float:
    """∂F/∂ξ = −(Γ²/2) ∂²S/∂ξ²."""
    _, _, d2s = lorentz_sum_derivatives(xi, gamma, tol)
    return -0.5 * gamma * gamma * d2s


def _nearest_index(zeros: np.ndarray, xi: float) -> int:
    return int(np.argmin(np.abs(zeros - xi))) + 1


def find_extrema(
    gamma: float,
    xi_lo: float,
    xi_hi: float,
    step: Optional[float] = None,
    tol: Optional[float] = None,
) -> list[ExtremumRecord]:
    """Locate all extrema of ⟨τ⟩ in [xi_lo, xi_hi].

    Sign changes of F on a uniform scan are refined by Brent's method and
    classified by the sign of ∂F/∂ξ. Maxima are labelled by the nearest zero
    of J_0, minima by the nearest positive zero of J_1.

    Args:
        gamma: Decay rate Γ > 0.
        xi_lo: Lower end of the range, positive.
        xi_hi: Upper end of the range.
        step: Scan step, resonance.scan_step by default.
        tol: Root tolerance, resonance.root_tol by default.

    Returns:
        list[ExtremumRecord]: Extrema in increasing ξ, possibly empty.
    """
    config = app.settings.resonance
    step = config.scan_step if step is None else step
    tol = config.root_tol if tol is None else tol
    if not gamma > 0:
        raise InvalidParameter(f"gamma must be positive, got {gamma}")
    if not 0 < xi_lo < xi_hi:
        raise InvalidParameter(f"need 0 < xi_lo < xi_hi, got {xi_lo}, {xi_hi}")

    count = max(1, int(xi_hi / math.pi) + 3)
    zeros = {
        ExtremumKind.MAX: bessel_zeros(0, count),
        ExtremumKind.MIN: bessel_zeros(1, count),
    }
    grid = np.append(np.arange(xi_lo, xi_hi, step), xi_hi)
    values = [stationarity_residual(x, gamma) for x in grid]
    roots = []
    for a, b, fa, fb in zip(grid, grid[1:], values, values[1:]):
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0.0:
            roots.append(
                brentq(stationarity_residual, a, b, args=(gamma,), xtol=tol)
            )
    if values[-1] == 0.0:
        roots.append(float(grid[-1]))

    records = []
    for xi in roots:
        slope = stationarity_slope(xi, gamma)
        kind = ExtremumKind.MAX if slope < 0.0 else ExtremumKind.MIN
        records.append(
            ExtremumRecord(
                xi_star=xi,
                kind=kind,
                gamma=gamma,
                n=_nearest_index(zeros[kind], xi),
            )
        )
    logger.debug("Found %d extrema at gamma=%g", len(records), gamma)
    return records


def extrema_near(
    xi: float, gamma: float, half_width: float = 0.02, step: float = 2e-5
) -> list[ExtremumRecord]:
    """Extrema of ⟨τ⟩ in a narrow window, scanned finely.

    Close to a fold the maximum and its partner minimum are separated by
    about (Γ_cr − Γ)^½, far below the default scan step.

    Args:
        xi: Window centre.
        gamma: Decay rate.
        half_width: Half width of the window.
        step: Scan step.

    Returns:
        list[ExtremumRecord]: Extrema in the window.
    """
    lo = max(xi - half_width, 0.5 * half_width)
    return find_extrema(gamma, lo, xi + half_width, step=step, tol=1e-14)


def small_gamma_shift(n: int, gamma: float) -> float:
    """Leading-order displacement ξ − ξ_n of the n-th maximum of ⟨τ⟩.

    Args:
        n: Index of the zero ξ_n of J_0, from one.
        gamma: Decay rate Γ, small.

    Returns:
        float: Γ²/J_1(ξ_n)² · Σ_{k≥1} J_k (J_{k+1} − J_{k−1}) / (Γ² + 4k²).
    """
    if n < 1:
        raise InvalidParameter(f"n must be at least 1, got {n}")
    if gamma == 0.0:
        return 0.0
    if gamma > app.settings.resonance.small_gamma:
        logger.warning(
            "Small-gamma shift used at gamma=%g above %g",
            gamma,
            app.settings.resonance.small_gamma,
        )
    xi_n = float(bessel_zeros(0, n)[-1])
    j1 = bessel_j(1, xi_n)
    return -gamma * gamma * crossing_sum(xi_n, gamma) / (j1 * j1)


@dataclass(frozen=True)
class PairState:
    """Maximum of pair n with the extrema of F in its two adjacent gaps.

    The left gap (F > 0) lies between the neighbouring zero `left` and the
    maximum, the right gap (F < 0) between the maximum and `right`. A gap
    closes when its depth, the extremum of σF with σ = −1 on the left and
    +1 on the right, reaches zero.
    """

    gamma: float
    left: float
    left_f: float
    xi_max: float
    right_f: float
    right: float
    depth_left: float
    depth_right: float


@dataclass(frozen=True)
class PairClosing:
    """Bracket in Γ across which a gap of the pair closes."""

    side: str
    last: PairState
    gamma_hi: float


class PairTracker(LogMixin):
    """Continuation in Γ of the maximum of ⟨τ⟩ next to the n-th J_0 zero."""

    def __init__(
        self,
        n: int,
        gamma_start: Optional[float] = None,
        gamma_step: Optional[float] = None,
        gamma_max: Optional[float] = None,
    ) -> None:
        """Constructor.

        Args:
            n: Pair index, from one.
            gamma_start: First Γ of the continuation.
            gamma_step: Continuation step.
            gamma_max: Largest Γ attempted.
        """
        if n < 1:
            raise InvalidParameter(f"n must be at least 1, got {n}")
        config = app.settings.resonance
        self.n = n
        self.gamma_start = gamma_start or config.gamma_start
        self.gamma_step = gamma_step or config.gamma_step
        self.gamma_max = gamma_max or config.gamma_max
        self.root_tol = config.root_tol
        self.xi_n = float(bessel_zeros(0, n)[-1])

    @staticmethod
    def _gap(
        gamma: float, lo: float, hi: float, sign: float
    ) -> tuple[float, float]:
        result = minimize_scalar(
            lambda x: sign * stationarity_residual(x, gamma),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-10},
        )
        return float(result.x), float(result.fun)

    @staticmethod
    def _walk(gamma: float, start: float, direction: float) -> float:
        """Nearest zero of F from a gap extremum, walking in one direction."""
        f0 = stationarity_residual(start, gamma)
        h = 1e-4
        a = start
        while h < 10.0:
            b = start + direction * h
            if b <= 0.0:
                return 0.0
            fb = stationarity_residual(b, gamma)
            if fb * f0 <= 0.0:
                lo, hi = sorted((a, b))
                return float(brentq(stationarity_residual, lo, hi,
                                    args=(gamma,), xtol=1e-12))
            a = b
            h *= 2.0
        raise NoConvergence(f"no neighbouring zero of F from xi={start}")

    def _windows(self, state: PairState) -> dict[str, tuple[float, float]]:
        pad_left = min(_WINDOW_PAD, 0.25 * (state.xi_max - state.left))
        pad_right = min(_WINDOW_PAD, 0.25 * (state.right - state.xi_max))
        lower = 0.0 if self.n == 1 else state.left - pad_left
        return {
            "left": (max(lower, 0.0), state.xi_max + pad_right),
            "right": (state.xi_max - pad_left, state.right + pad_right),
        }

    def _state(
        self,
        gamma: float,
        left_gap: tuple[float, float],
        right_gap: tuple[float, float],
    ) -> PairState:
        left_f, depth_left = left_gap
        right_f, depth_right = right_gap
        xi_max = brentq(
            stationarity_residual,
            left_f,
            right_f,
            args=(gamma,),
            xtol=self.root_tol,
        )
        left = 0.0 if self.n == 1 else self._walk(gamma, left_f, -1.0)
        right = self._walk(gamma, right_f, 1.0)
        return PairState(
            gamma=gamma,
            left=left,
            left_f=left_f,
            xi_max=float(xi_max),
            right_f=right_f,
            right=right,
            depth_left=depth_left,
            depth_right=depth_right,
        )

    def start(self) -> PairState:
        """Locate the pair at the starting Γ.

        Returns:
            PairState: The initial state.

        Raises:
            NoPairFound: No maximum next to the n-th J_0 zero, or no
                neighbouring minimum on both sides.
        """
        gamma = self.gamma_start
        lo = max(self.xi_n - 4.0, 1e-3)
        records = find_extrema(gamma, lo, self.xi_n + 4.0)
        maxima = [
            (i, r)
            for i, r in enumerate(records)
            if r.kind is ExtremumKind.MAX and r.n == self.n
        ]
        if not maxima:
            raise NoPairFound(f"no maximum near xi_{self.n} at gamma={gamma}")
        i, record = maxima[0]
        if self.n == 1:
            left = 0.0
        elif i > 0 and records[i - 1].kind is ExtremumKind.MIN:
            left = records[i - 1].xi_star
        else:
            raise NoPairFound(f"no minimum left of maximum {self.n}")
        if i + 1 < len(records) and records[i + 1].kind is ExtremumKind.MIN:
            right = records[i + 1].xi_star
        else:
            raise NoPairFound(f"no minimum right of maximum {self.n}")
        state = self._state(
            gamma,
            self._gap(gamma, left, record.xi_star, -1.0),
            self._gap(gamma, record.xi_star, right, 1.0),
        )
        self.logger.debug("Pair %d at gamma=%g: %s", self.n, gamma, state)
        return state

    def advance(
        self, state: PairState, gamma: float
    ) -> Union[PairState, PairClosing]:
        """Continue the pair from its state to a larger Γ.

        Args:
            state: State at a smaller Γ.
            gamma: New decay rate.

        Returns:
            PairState or PairClosing: The new state, or the bracket of the
            first gap to close.
        """
        windows = self._windows(state)
        left_gap = self._gap(gamma, *windows["left"], -1.0)
        right_gap = self._gap(gamma, *windows["right"], 1.0)
        closed = [
            side
            for side, (_, depth) in (("left", left_gap), ("right", right_gap))
            if depth >= 0.0
        ]
        if not closed:
            return self._state(gamma, left_gap, right_gap)
        if len(closed) == 2:
            closed.sort(key=lambda side: self.closing_gamma(
                PairClosing(side=side, last=state, gamma_hi=gamma)
            ))
        return PairClosing(side=closed[0], last=state, gamma_hi=gamma)

    def depth(self, state: PairState, side: str, gamma: float) -> float:
        """Depth of a gap at Γ, searched in the windows of `state`."""
        sign = -1.0 if side == "left" else 1.0
        return self._gap(gamma, *self._windows(state)[side], sign)[1]

    def closing_gamma(self, closing: PairClosing) -> float:
        """Γ at which the depth of the closing gap reaches zero."""
        return float(
            brentq(
                lambda g: self.depth(closing.last, closing.side, g),
                closing.last.gamma,
                closing.gamma_hi,
                xtol=1e-12,
            )
        )

    def locate_fold(self, closing: PairClosing) -> tuple[float, float]:
        """Approximate fold (ξ, Γ) from a closing bracket."""
        gamma = self.closing_gamma(closing)
        sign = -1.0 if closing.side == "left" else 1.0
        window = self._windows(closing.last)[closing.side]
        xi, _ = self._gap(gamma, *window, sign)
        return xi, gamma

    def follow(
        self, gammas: Optional[ArrayLike] = None
    ) -> Iterator[Union[PairState, PairClosing]]:
        """Continue the pair through increasing Γ.

        Args:
            gammas: Γ values to report; the continuation grid by default.
                Intermediate continuation steps are inserted as needed.

        Yields:
            PairState at each requested Γ, then a PairClosing if a gap
            closes before the last requested Γ.
        """
        targets = (
            np.arange(
                self.gamma_start, self.gamma_max + 1e-12, self.gamma_step
            )
            if gammas is None
            else np.sort(np.asarray(gammas, dtype=float))
        )
        state = self.start()
        for target in targets:
            if target < self.gamma_start:
                raise InvalidParameter(
                    f"gamma {target} below the continuation start"
                )
            while state.gamma < target:
                gamma = min(target, state.gamma + self.gamma_step)
                result = self.advance(state, gamma)
                if isinstance(result, PairClosing):
                    yield result
                    return
                state = result
            yield state


def _fold_polish(
    xi: float, gamma: float, tol: float
) -> tuple[float, float, tuple[float, float]]:
    def equations(x: np.ndarray) -> list[float]:
        _, ds, d2s = lorentz_sum_derivatives(float(x[0]), float(x[1]))
        return [ds, d2s]

    solution = root(
        equations, [xi, gamma], method="hybr", options={"xtol": 1e-13}
    )
    xi_cr, gamma_cr = (float(v) for v in solution.x)
    ds, d2s = equations(solution.x)
    if max(abs(ds), abs(d2s)) > tol:
        raise NoConvergence(
            f"fold residuals ({ds:.3g}, {d2s:.3g}) exceed {tol:g}"
        )
    return xi_cr, gamma_cr, (ds, d2s)


def find_critical_point(n: int) -> CriticalPoint:
    """Continue pair n in Γ until its maximum annihilates with a minimum.

    Args:
        n: Pair index, from one.

    Returns:
        CriticalPoint: The fold, with the side of the partner minimum.

    Raises:
        NoPairFound: The pair is absent at the starting Γ.
        NoConvergence: No fold below resonance.gamma_max, or the Newton
            polish failed.
    """
    tracker = PairTracker(n)
    closing = None
    for item in tracker.follow():
        if isinstance(item, PairClosing):
            closing = item
    if closing is None:
        raise NoConvergence(
            f"pair {n} survives up to gamma={tracker.gamma_max}"
        )
    xi_f, gamma_f = tracker.locate_fold(closing)
    xi_cr, gamma_cr, residuals = _fold_polish(
        xi_f, gamma_f, app.settings.resonance.fold_tol
    )
    logger.info(
        "Pair %d folds at xi=%.10f gamma=%.10f (%s partner)",
        n,
        xi_cr,
        gamma_cr,
        closing.side,
    )
    return CriticalPoint(
        xi_cr=xi_cr,
        gamma_cr=gamma_cr,
        n=n,
        partner=closing.side,
        residuals=residuals,
    )


def fit_power_law(x: ArrayLike, y: ArrayLike) -> ExponentFit:
    """Fit y = c·x^β by linear regression of log y on log x.

    Args:
        x: Positive abscissae.
        y: Positive ordinates.

    Returns:
        ExponentFit: Exponent with its 95% confidence half-width, not
        acceptable when the RMS residual exceeds resonance.fit_rms_tol.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    config = app.settings.resonance
    minimum = config.min_fit_points
    if len(x) < minimum:
        raise FitWindowTooNarrow(
            f"{len(x)} points, at least {minimum} needed"
        )
    lx, ly = np.log(x), np.log(y)
    fit = linregress(lx, ly)
    rms = float(np.sqrt(np.mean((ly - fit.intercept - fit.slope * lx) ** 2)))
    acceptable = rms <= config.fit_rms_tol
    if not acceptable:
        logger.warning(
            "Power-law fit RMS residual %.3g exceeds %g",
            rms,
            config.fit_rms_tol,
        )
    half_width = float(student_t.ppf(0.975, len(x) - 2) * fit.stderr)
    return ExponentFit(
        beta=float(fit.slope),
        ci_half_width=half_width,
        window=(float(x.min()), float(x.max())),
        rms_residual=rms,
        points=len(x),
        acceptable=acceptable,
    )


def critical_exponent_fit(
    n: int, critical: Optional[CriticalPoint] = None
) -> ExponentFit:
    """Exponent β of ξ_cr − ξ_max ∝ (Γ_cr − Γ)^β below the fold of pair n.

    Args:
        n: Pair index.
        critical: Fold of the pair, found when not given.

    Returns:
        ExponentFit: The fitted exponent.

    Raises:
        FitWindowTooNarrow: Fewer than resonance.min_fit_points ladder
            points have a surviving maximum.
    """
    critical = critical or find_critical_point(n)
    config = app.settings.resonance
    j = np.arange(1, config.ladder_points + 1)
    ladder = critical.gamma_cr * (1.0 - 2.0 ** (-j) * config.ladder_width)
    states = [
        s for s in PairTracker(n).follow(ladder) if isinstance(s, PairState)
    ]
    distance = np.array([critical.gamma_cr - s.gamma for s in states])
    offset = np.array([abs(critical.xi_cr - s.xi_max) for s in states])
    return fit_power_law(distance, offset)


class ResonanceAPI(API):
    """Resonance analysis commands."""

    commands = Typer(help="Extrema and critical points of <tau>(xi).")

    @staticmethod
    @commands.command("extrema", help="List the extrema of <tau>(xi).")
    def extrema_command(
        gamma: Annotated[float, typer.Option(help="Decay rate.")],
        xi_lo: Annotated[float, typer.Option(help="Scan start.")] = 0.5,
        xi_hi: Annotated[float, typer.Option(help="Scan end.")] = 8.0,
    ) -> None:
        """Print the extrema at one decay rate as YAML.

        Args:
            gamma: Decay rate.
            xi_lo: Scan start.
            xi_hi: Scan end.

        Returns:
            None.
        """
        records = find_extrema(gamma, xi_lo, xi_hi)
        ResonanceAPI.report(
            [r.dict() | {"kind": r.kind.value} for r in records]
        )

    @staticmethod
    @commands.command("critical", help="Find the fold of a max-min pair.")
    def critical_command(
        n: Annotated[int, typer.Option(help="Pair index.")] = 1,
        exponent: Annotated[
            bool, typer.Option(help="Also fit the critical exponent.")
        ] = False,
    ) -> None:
        """Print the critical point of pair n as YAML.

        Args:
            n: Pair index.
            exponent: Fit the critical exponent as well.

        Returns:
            None.
        """
        critical = find_critical_point(n)
        report = critical.dict()
        report["residuals"] = list(critical.residuals)
        if exponent:
            fit = critical_exponent_fit(n, critical)
            report["exponent"] = fit.dict() | {"window": list(fit.window)}
        ResonanceAPI.report(report)
