"""Copyright (c) 2023 Genome Research Ltd.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.

Acceptance checks comparing the numerical engines with the closed forms.
"""

import math
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np
import pandas as pd
import typer
import yaml
from pydantic import BaseModel
from scipy.stats import kstest
from typer import Typer
from typing_extensions import Annotated

from .api import API
from .app import app
from .dynamics import (
    analytic_solution,
    evolve,
    evolve_floquet,
    mean_waiting_time_numeric,
    sample_waiting_times,
)
from .errors import PhotonWindowError
from .figures import (
    FIG1_GAMMAS,
    FIG1_RABI,
    FIG3_PAIRS,
    FIG4_DRIVES,
    fig4_table,
)
from .formulas import emission_rate_strong_drive, mean_tau_rg
from .formulas import mean_tau_rg_detuned
from .logger import LogMixin
from .model import ScaledParams
from .resonance import (
    CriticalPoint,
    critical_exponent_fit,
    extrema_near,
    find_critical_point,
    find_extrema,
    small_gamma_shift,
)
from .runconfig import Engine, RunConfig, Variable, load_config
from .series import bessel_zeros, lorentz_sum, lorentz_sum_dxi, series_row
from .sweep import SweepSpec, run_sweep


class Criterion(BaseModel):
    """Outcome of one acceptance check."""

    name: str
    passed: bool
    measured: Any = None
    tolerance: Any = None
    detail: str = ""


class Report(BaseModel):
    """All checks of a validation run."""

    criteria: list[Criterion] = []

    @property
    def passed(self) -> bool:
        """True when every criterion passed."""
        return all(c.passed for c in self.criteria)

    def to_yaml(self) -> str:
        """Human-readable report."""
        return yaml.dump(
            {
                "passed": self.passed,
                "criteria": [c.dict() for c in self.criteria],
            },
            sort_keys=False,
        )


def _local_maxima(x: np.ndarray, y: np.ndarray) -> list[float]:
    """Grid maxima refined by a parabola through the three nearest points."""
    peaks = []
    for i in range(1, len(y) - 1):
        if y[i] > y[i - 1] and y[i] >= y[i + 1]:
            denominator = y[i - 1] - 2.0 * y[i] + y[i + 1]
            offset = (
                0.5 * (y[i - 1] - y[i + 1]) / denominator
                if denominator
                else 0.0
            )
            peaks.append(float(x[i] + offset * (x[i + 1] - x[i])))
    return peaks


def _float(value: float) -> float:
    return float(f"{value:.6g}")


class Validator(LogMixin):
    """Runs the acceptance checks for one run configuration."""

    def __init__(self, config: RunConfig, jobs: Optional[int] = None) -> None:
        """Constructor.

        Args:
            config: Run configuration; its parameters are checked as well.
            jobs: Parallel workers for the sweeps.
        """
        self.config = config
        self.jobs = jobs
        self.checks: dict[str, Callable[[], Criterion]] = {
            "params": self.params,
            "fig1": self.fig1,
            "fig2": self.fig2,
            "fig3": self.fig3,
            "fig4": self.fig4,
            "properties": self.properties,
            "sampler": self.sampler,
        }

    def params(self) -> Criterion:
        """The configured parameters yield a finite ⟨τ⟩."""
        p = self.config.scaled_params()
        tau = mean_waiting_time_numeric(p, self.config.tol)
        prediction = mean_tau_rg(p.xi, p.gamma, p.rabi)
        return Criterion(
            name="params",
            passed=math.isfinite(tau),
            measured={"tau_ode": tau, "tau_rg_weak": prediction.mean_tau},
            detail="; ".join(prediction.validity_warnings),
        )

    def fig1(
        self,
        step: float = 0.05,
        gammas: tuple[float, ...] = FIG1_GAMMAS,
    ) -> Criterion:
        """ODE and weak-drive ⟨τ⟩ agree; maxima sit near the J_0 zeros.

        Peak positions are taken from the Γ = 0.5 sweep and are only
        checked when `gammas` contains it.
        """
        gaps = {}
        tolerances = {}
        peaks: list[float] = []
        for gamma in gammas:
            spec = SweepSpec(
                variable=Variable.XI,
                lo=0.0,
                hi=8.0,
                step=step,
                fixed=ScaledParams.create(gamma=gamma, rabi=FIG1_RABI),
                engines=[Engine.ODE, Engine.RG_WEAK],
            )
            frame = run_sweep(spec, self.jobs, self.config.tol)
            ode, rg = frame["tau_ode"], frame["tau_rg_weak"]
            gaps[gamma] = float(((ode - rg).abs() / ode).max())
            tolerances[gamma] = max(0.02, 3.0 * FIG1_RABI**2 / gamma**2)
            if gamma == 0.5:
                peaks = _local_maxima(frame["xi"].to_numpy(), ode.to_numpy())
        zeros = bessel_zeros(0, 2)
        predicted = [
            float(z) + small_gamma_shift(n, 0.5)
            for n, z in enumerate(zeros, start=1)
        ]
        near = [
            min((abs(x - z) for x in peaks), default=math.inf)
            for z in zeros
        ]
        toward = [
            min((abs(x - z) for x in peaks), default=math.inf)
            for z in predicted
        ]
        passed = all(gaps[g] <= tolerances[g] for g in gammas)
        if 0.5 in gammas:
            passed = (
                passed
                and all(d <= 0.1 for d in near)
                and all(d <= 0.1 for d in toward)
            )
        return Criterion(
            name="fig1",
            passed=passed,
            measured={
                "max_relative_gap": gaps,
                "peaks": [_float(x) for x in peaks],
                "peak_offsets": [_float(d) for d in near],
            },
            tolerance={"relative_gap": tolerances, "peak_offset": 0.1},
        )

    def fig2(self) -> Criterion:
        """Maxima next to ξ_1 and ξ_2 exist at Γ = 1 and are gone at 2.5."""
        zeros = bessel_zeros(0, 2)

        def maxima(gamma: float) -> list[float]:
            return [
                r.xi_star
                for r in find_extrema(gamma, 2.0, 6.0)
                if r.kind.value == "max"
            ]

        def adjacent(xs: list[float]) -> list[bool]:
            return [any(abs(x - z) < 0.5 for x in xs) for z in zeros]

        present, absent = maxima(1.0), maxima(2.5)
        return Criterion(
            name="fig2",
            passed=all(adjacent(present)) and not any(adjacent(absent)),
            measured={
                "maxima_gamma_1.0": [_float(x) for x in present],
                "maxima_gamma_2.5": [_float(x) for x in absent],
            },
        )

    def _argmax_offset(self, gamma: float) -> float:
        rabi = 0.15 * gamma
        records = [
            r
            for r in find_extrema(gamma, 1.5, 3.5)
            if r.kind.value == "max"
        ]
        xi_star = records[0].xi_star
        grid = xi_star + 0.01 * np.arange(-5, 6)
        taus = [
            mean_waiting_time_numeric(
                ScaledParams.create(gamma=gamma, rabi=rabi, xi=x),
                self.config.tol,
            )
            for x in grid
        ]
        return abs(float(grid[int(np.argmax(taus))]) - xi_star)

    @staticmethod
    def _merges(critical: CriticalPoint, offset: float = 1e-6) -> bool:
        below = extrema_near(critical.xi_cr, critical.gamma_cr - offset)
        above = extrema_near(critical.xi_cr, critical.gamma_cr + offset)
        kinds = {r.kind.value for r in below}
        return kinds == {"max", "min"} and not above

    def fig3(
        self,
        pairs: tuple[int, ...] = FIG3_PAIRS,
        argmax_gammas: tuple[float, ...] = (0.25, 0.5, 1.0),
    ) -> Criterion:
        """Folds inside (1, 2.5) where a maximum and a minimum merge,
        square-root exponent, ODE argmax match."""
        folds = {}
        exponents = {}
        passed = True
        for n in pairs:
            critical = find_critical_point(n)
            fit = critical_exponent_fit(n, critical)
            folds[n] = {
                "gamma_cr": critical.gamma_cr,
                "xi_cr": critical.xi_cr,
                "residual": max(abs(r) for r in critical.residuals),
                "merges": self._merges(critical),
            }
            exponents[n] = {
                "beta": fit.beta,
                "ci": fit.ci_half_width,
                "rms_residual": fit.rms_residual,
            }
            passed &= 1.0 < critical.gamma_cr < 2.5
            passed &= folds[n]["residual"] <= 1e-6
            passed &= folds[n]["merges"]
            passed &= fit.acceptable
            passed &= abs(fit.beta - 0.5) <= 0.05
        offsets = {g: self._argmax_offset(g) for g in argmax_gammas}
        passed &= all(d <= 0.02 for d in offsets.values())
        return Criterion(
            name="fig3",
            passed=bool(passed),
            measured={
                "folds": folds,
                "exponents": exponents,
                "argmax_offsets": offsets,
            },
            tolerance={
                "gamma_cr": [1.0, 2.5],
                "residual": 1e-6,
                "merges": "max and min below, none above",
                "rms_residual": app.settings.resonance.fit_rms_tol,
                "beta": "0.5 +- 0.05",
                "argmax_offset": 0.02,
            },
        )

    def fig4(
        self,
        step: float = 0.02,
        drives: tuple[float, ...] = FIG4_DRIVES,
    ) -> Criterion:
        """Normalized strong-drive and Bloch spectra coincide and peak at
        integer detunings."""
        table: pd.DataFrame = fig4_table(self.jobs, step, drives)
        delta = table["delta"].to_numpy()
        limits = {
            d: limit
            for d, limit in {0.29: 0.1, 3.2: 0.25}.items()
            if d in drives
        }
        gaps = {
            drive: float(
                (
                    table[f"rate_rg_strong_{drive:g}"]
                    - table[f"rate_bloch_{drive:g}"]
                )
                .abs()
                .max()
            )
            for drive in limits
        }
        peaks = {
            column: float(delta[int(np.argmax(table[column].to_numpy()))])
            for column in table.columns
            if column.startswith("rate_")
        }
        integer = all(abs(d - round(d)) <= 0.011 for d in peaks.values())
        return Criterion(
            name="fig4",
            passed=integer and all(gaps[d] <= limits[d] for d in limits),
            measured={"max_gap": gaps, "peaks": peaks},
            tolerance={"max_gap": limits, "peak": "integer delta"},
        )

    def properties(self) -> Criterion:
        """Structural identities of the engines and closed forms."""
        failures = []
        p = ScaledParams.create(gamma=0.5, rabi=0.1, xi=1.0)
        survival = evolve(p, 200.0).survival
        if np.max(np.diff(survival)) > 1e-9:
            failures.append("survival increases")
        lossless = evolve(p.replace(gamma=0.0), 1000.0, tol=1e-13)
        norms = np.sum(np.abs(lossless.psi) ** 2, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-9:
            failures.append("norm drifts at gamma=0")
        for xi in np.arange(0.0, 10.05, 0.1):
            if series_row(float(xi)).norm() < 1.0 - 1e-12:
                failures.append(f"Bessel row incomplete at xi={xi:g}")
        h = 1e-5
        rng = np.random.default_rng(self.config.seed)
        for xi, gamma in zip(
            rng.uniform(0.0, 10.0, 50), rng.uniform(0.2, 2.5, 50)
        ):
            difference = (
                lorentz_sum(xi + h, gamma) - lorentz_sum(xi - h, gamma)
            ) / (2.0 * h)
            if abs(lorentz_sum_dxi(xi, gamma) - difference) > 1e-6:
                failures.append(
                    "dS/dxi disagrees with a finite difference at "
                    f"xi={xi:.6g} gamma={gamma:.6g}"
                )
        weak = mean_tau_rg(1.0, 0.5, 0.1).inverse_tau
        detuned = mean_tau_rg_detuned(1.0, 0.5, 0.1, 0.0).inverse_tau
        if weak != detuned:
            failures.append("detuned formula differs at delta=0")
        gamma, rabi = 0.5, 0.3
        strong = emission_rate_strong_drive(0.0, gamma, rabi).inverse_tau
        if strong != gamma * (rabi * rabi) / (
            gamma * gamma + 2.0 * (rabi * rabi)
        ):
            failures.append("strong-drive formula is not saturated at xi=0")
        tau = analytic_solution(p).mean_waiting_time
        reference = mean_tau_rg(p.xi, p.gamma, p.rabi).mean_tau
        if abs(tau - reference) > 1e-12 * reference:
            failures.append("1/(2 zeta) differs from the weak-drive <tau>")
        return Criterion(
            name="properties", passed=not failures, measured=failures
        )

    def sampler(self, n: int = 100000) -> Criterion:
        """Sample mean and distribution of the inverse-CDF sampler."""
        p = ScaledParams.create(gamma=0.5, rabi=0.1, xi=1.0)
        samples = sample_waiting_times(p, n, self.config.seed, self.config.tol)
        tau = mean_waiting_time_numeric(p, self.config.tol)
        error = float(np.std(samples, ddof=1) / math.sqrt(n))
        grid = evolve_floquet(p, tol=self.config.tol)
        survival = np.minimum.accumulate(grid.survival)

        def cdf(t: np.ndarray) -> np.ndarray:
            return 1.0 - np.interp(t, grid.times, survival, right=0.0)

        ks = kstest(samples, cdf)
        offset = abs(float(np.mean(samples)) - tau)
        return Criterion(
            name="sampler",
            passed=offset <= 3.0 * error and ks.pvalue >= 0.01,
            measured={
                "mean": float(np.mean(samples)),
                "quadrature": tau,
                "standard_error": error,
                "ks_pvalue": float(ks.pvalue),
            },
            tolerance={"standard_errors": 3, "ks_pvalue": 0.01},
        )

    def run(self, names: Optional[list[str]] = None) -> Report:
        """Run the selected checks, all by default.

        A check that raises is reported as failed with the error, and the
        remaining checks still run.

        Args:
            names: Check names.

        Returns:
            Report: One criterion per check.
        """
        names = names or list(self.checks)
        unknown = set(names) - set(self.checks)
        if unknown:
            raise ValueError(f"unknown criteria: {', '.join(sorted(unknown))}")
        report = Report()
        for name in names:
            self.logger.info("Checking %s", name)
            try:
                criterion = self.checks[name]()
            except (PhotonWindowError, ValueError) as e:
                self.logger.warning("Check %s raised %s", name, e)
                criterion = Criterion(
                    name=name,
                    passed=False,
                    detail=f"{type(e).__name__}: {e}",
                )
            if not criterion.passed:
                self.logger.warning("Check %s failed", name)
            report.criteria.append(criterion)
        return report


def validate(
    config_path: Optional[Path] = None,
    names: Optional[list[str]] = None,
    jobs: Optional[int] = None,
) -> Report:
    """Run the acceptance checks for a configuration file.

    Args:
        config_path: JSON run configuration, the defaults when omitted.
        names: Checks to run, all by default.
        jobs: Parallel workers.

    Returns:
        Report: The outcome of every check.

    Raises:
        ConfigParse: The configuration is malformed.
    """
    return Validator(load_config(config_path), jobs).run(names)


class ValidationAPI(API):
    """Validation commands."""

    commands = Typer(help="Acceptance checks.")

    @staticmethod
    @commands.command("validate", help="Run the acceptance checks.")
    def validate_command(
        config: Annotated[
            Optional[Path],
            typer.Option("--config", help="JSON run configuration."),
        ] = None,
        criterion: Annotated[
            Optional[list[str]],
            typer.Option(help="Check to run, may be repeated."),
        ] = None,
        jobs: Annotated[
            Optional[int], typer.Option(help="Parallel workers.")
        ] = None,
    ) -> None:
        """Print the report; exit 1 on failure and 2 on a config error.

        Args:
            config: Run configuration file.
            criterion: Checks to run.
            jobs: Parallel workers.

        Returns:
            None.
        """
        try:
            report = validate(config, criterion, jobs)
        except ValueError as e:
            typer.echo(f"configuration error: {e}", err=True)
            raise typer.Exit(code=2)
        app.echo(report.to_yaml())
        if not report.passed:
            raise typer.Exit(code=1)
