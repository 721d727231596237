"""Copyright (c) 2023 Genome Research Ltd.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.

Parameter sweeps and the quick-run commands of the command line.
"""

import math
from pathlib import Path
from typing import Any, Optional

import dask
import numpy as np
import pandas as pd
import typer
from pydantic import BaseModel
from typer import Typer
from typing_extensions import Annotated

from .api import API
from .app import app
from .bloch import period_averaged_population
from .dynamics import (
    evolve,
    mean_waiting_time_numeric,
    sample_waiting_times,
)
from .errors import ConfigParse, PhotonWindowError
from .formulas import (
    emission_rate_strong_drive,
    mean_tau_rg,
    mean_tau_rg_detuned,
)
from .logger import LogMixin, get_logger
from .model import ScaledParams
from .output import RunManifest, write_table
from .runconfig import (
    Engine,
    RunConfig,
    Variable,
    flag_overrides,
    load_config,
)

logger = get_logger(__name__)


class SweepSpec(BaseModel):
    """One swept variable over a grid, with the engines to evaluate."""

    variable: Variable
    lo: float
    hi: float
    step: float
    fixed: ScaledParams
    engines: list[Engine]

    @classmethod
    def from_config(cls, config: RunConfig) -> "SweepSpec":
        """Sweep described by a run configuration."""
        return cls(
            variable=config.sweep.variable,
            lo=config.sweep.lo,
            hi=config.sweep.hi,
            step=config.sweep.step,
            fixed=config.scaled_params(),
            engines=config.engines,
        )

    def grid(self) -> np.ndarray:
        """Grid values, at least one point."""
        count = int(math.floor((self.hi - self.lo) / self.step + 1e-9)) + 1
        return self.lo + self.step * np.arange(count)

    def point(self, value: float) -> ScaledParams:
        """Fixed parameters with the swept variable set to value."""
        return self.fixed.replace(**{self.variable.field: float(value)})

    def to_manifest(self) -> dict[str, Any]:
        """Plain representation for a run manifest."""
        spec = self.dict(exclude={"fixed"})
        spec["variable"] = self.variable.value
        spec["engines"] = [e.value for e in self.engines]
        spec["fixed"] = self.fixed.dict() | {"xi": self.fixed.xi}
        return spec


class PointResult(BaseModel):
    """Outcome of one engine at one parameter point."""

    rate: float = math.nan
    tau: float = math.nan
    warnings: list[str] = []
    error: str = ""


def evaluate_point(
    engine: Engine, p: ScaledParams, tol: Optional[float] = None
) -> PointResult:
    """Emission rate ⟨τ⟩⁻¹ from one engine; failures are recorded.

    Args:
        engine: Engine to run.
        p: Scaled parameters.
        tol: Integration tolerance for the ode engine.

    Returns:
        PointResult: Rate and ⟨τ⟩, or the error that prevented them.
    """
    warnings: list[str] = []
    try:
        if engine is Engine.ODE:
            rate = 1.0 / mean_waiting_time_numeric(p, tol)
        elif engine is Engine.BLOCH:
            rate = p.gamma * period_averaged_population(p)
        else:
            if engine is Engine.RG_WEAK:
                if p.detuning != 0.0:
                    warnings.append("rg_weak ignores the detuning")
                prediction = mean_tau_rg(p.xi, p.gamma, p.rabi)
            elif engine is Engine.RG_DETUNED:
                prediction = mean_tau_rg_detuned(
                    p.xi, p.gamma, p.rabi, p.detuning
                )
            else:
                prediction = emission_rate_strong_drive(
                    p.xi, p.gamma, p.rabi, p.detuning
                )
            rate = prediction.inverse_tau
            warnings.extend(prediction.validity_warnings)
    except (PhotonWindowError, ValueError) as e:
        logger.warning(
            "%s failed at gamma=%g rabi=%g xi=%g delta=%g: %s",
            engine.value,
            p.gamma,
            p.rabi,
            p.xi,
            p.detuning,
            e,
        )
        return PointResult(
            warnings=warnings, error=f"{type(e).__name__}: {e}"
        )
    tau = math.inf if rate == 0.0 else 1.0 / rate
    return PointResult(rate=rate, tau=tau, warnings=warnings)


class Sweep(LogMixin):
    """Evaluate every engine of a sweep at every grid point."""

    def __init__(self, spec: SweepSpec, tol: Optional[float] = None) -> None:
        """Constructor.

        Args:
            spec: The sweep.
            tol: Integration tolerance for the ode engine.
        """
        self.spec = spec
        self.tol = tol

    def run(self, jobs: Optional[int] = None) -> pd.DataFrame:
        """Run the sweep.

        Points are dispatched to a pool of `jobs` worker processes and the
        table is assembled in grid order.

        Args:
            jobs: Worker count; see Application.jobs.

        Returns:
            DataFrame: One row per grid point.
        """
        workers = app.jobs(jobs)
        grid = self.spec.grid()
        points = [self.spec.point(value) for value in grid]
        tasks = [
            dask.delayed(evaluate_point)(engine, p, self.tol)
            for p in points
            for engine in self.spec.engines
        ]
        self.logger.info(
            "Sweeping %s over %d points with %s on %d workers",
            self.spec.variable.value,
            len(grid),
            ", ".join(e.value for e in self.spec.engines),
            workers,
        )
        scheduler = "processes" if workers > 1 else "synchronous"
        results = dask.compute(
            *tasks, scheduler=scheduler, num_workers=workers
        )
        rows = []
        engines = self.spec.engines
        for i, (value, p) in enumerate(zip(grid, points)):
            row: dict[str, Any] = {
                "index": i,
                self.spec.variable.value: value,
                "gamma": p.gamma,
                "rabi": p.rabi,
                "delta": p.detuning,
                "xi": p.xi,
            }
            for j, engine in enumerate(engines):
                result = results[i * len(engines) + j]
                row[f"rate_{engine.value}"] = result.rate
                row[f"tau_{engine.value}"] = result.tau
                row[f"warnings_{engine.value}"] = "; ".join(result.warnings)
                row[f"error_{engine.value}"] = result.error
            rows.append(row)
        return pd.DataFrame(rows)


def run_sweep(
    spec: SweepSpec, jobs: Optional[int] = None, tol: Optional[float] = None
) -> pd.DataFrame:
    """Evaluate a sweep; per-point errors land in the error columns.

    Args:
        spec: The sweep.
        jobs: Worker count.
        tol: Integration tolerance for the ode engine.

    Returns:
        DataFrame: One row per grid point in grid order.
    """
    return Sweep(spec, tol).run(jobs)


def _load(path: Optional[Path], **flags: Any) -> RunConfig:
    try:
        return load_config(path, flag_overrides(**flags))
    except ConfigParse as e:
        typer.echo(f"configuration error: {e}", err=True)
        raise typer.Exit(code=2)


ConfigOption = Annotated[
    Optional[Path], typer.Option("--config", help="JSON run configuration.")
]
GammaOption = Annotated[Optional[float], typer.Option(help="Decay rate.")]
RabiOption = Annotated[Optional[float], typer.Option(help="Rabi frequency.")]
XiOption = Annotated[Optional[float], typer.Option(help="Modulation index.")]
DeltaOption = Annotated[Optional[float], typer.Option(help="Detuning.")]
OutDirOption = Annotated[
    Optional[Path], typer.Option(help="Output directory.")
]
SeedOption = Annotated[Optional[int], typer.Option(help="Random seed.")]
TolOption = Annotated[
    Optional[float], typer.Option(help="Integration tolerance.")
]
JobsOption = Annotated[
    Optional[int], typer.Option(help="Parallel workers.")
]


class SweepAPI(API):
    """Simulation and sweep commands."""

    commands = Typer(help="Simulations and parameter sweeps.")

    @staticmethod
    @commands.command("simulate", help="Evolve one parameter point.")
    def simulate_command(
        config: ConfigOption = None,
        gamma: GammaOption = None,
        rabi: RabiOption = None,
        xi: XiOption = None,
        delta: DeltaOption = None,
        out_dir: OutDirOption = None,
        tol: TolOption = None,
        t_end: Annotated[
            Optional[float], typer.Option(help="Final time.")
        ] = None,
    ) -> None:
        """Write a trajectory and print numeric and closed-form ⟨τ⟩.

        Args:
            config: Run configuration file.
            gamma: Decay rate.
            rabi: Rabi frequency.
            xi: Modulation index.
            delta: Detuning.
            out_dir: Output directory.
            tol: Integration tolerance.
            t_end: Final time of the trajectory.

        Returns:
            None.
        """
        run = _load(
            config, gamma=gamma, rabi=rabi, xi=xi, delta=delta,
            out_dir=out_dir, tol=tol,
        )
        p = run.scaled_params()
        t_end = t_end or run.t_end
        trajectory = evolve(p, t_end, run.tol)
        spec = p.dict() | {"xi": p.xi, "t_end": t_end, "tol": run.tol}
        path = write_table(
            trajectory.to_frame(),
            run.out_dir / "trajectory.csv",
            RunManifest.create("simulate", spec),
        )
        report: dict[str, Any] = {"trajectory": str(path)}
        for engine in (Engine.ODE, Engine.RG_DETUNED):
            result = evaluate_point(engine, p, run.tol)
            report[f"tau_{engine.value}"] = result.error or result.tau
        SweepAPI.report(report)

    @staticmethod
    @commands.command("sweep", help="Sweep one parameter over a grid.")
    def sweep_command(
        config: ConfigOption = None,
        gamma: GammaOption = None,
        rabi: RabiOption = None,
        xi: XiOption = None,
        delta: DeltaOption = None,
        engine: Annotated[
            Optional[list[Engine]],
            typer.Option(help="Engine, may be repeated."),
        ] = None,
        out_dir: OutDirOption = None,
        tol: TolOption = None,
        jobs: JobsOption = None,
    ) -> None:
        """Run a sweep and write sweep.csv.

        Args:
            config: Run configuration file.
            gamma: Decay rate.
            rabi: Rabi frequency.
            xi: Modulation index.
            delta: Detuning.
            engine: Engines to evaluate.
            out_dir: Output directory.
            tol: Integration tolerance.
            jobs: Parallel workers.

        Returns:
            None.
        """
        run = _load(
            config, gamma=gamma, rabi=rabi, xi=xi, delta=delta,
            engine=engine, out_dir=out_dir, tol=tol,
        )
        spec = SweepSpec.from_config(run)
        frame = run_sweep(spec, jobs, run.tol)
        path = write_table(
            frame,
            run.out_dir / "sweep.csv",
            RunManifest.create("sweep", spec.to_manifest() | {"tol": run.tol}),
        )
        errors = {
            column: int((frame[column] != "").sum())
            for column in frame.columns
            if column.startswith("error_")
        }
        SweepAPI.report(
            {"table": str(path), "rows": len(frame), "errors": errors}
        )

    @staticmethod
    @commands.command("sample", help="Sample first-photon waiting times.")
    def sample_command(
        config: ConfigOption = None,
        gamma: GammaOption = None,
        rabi: RabiOption = None,
        xi: XiOption = None,
        delta: DeltaOption = None,
        seed: SeedOption = None,
        out_dir: OutDirOption = None,
        tol: TolOption = None,
        n: Annotated[
            Optional[int], typer.Option(help="Number of samples.")
        ] = None,
    ) -> None:
        """Write samples.csv and print the sample statistics.

        Args:
            config: Run configuration file.
            gamma: Decay rate.
            rabi: Rabi frequency.
            xi: Modulation index.
            delta: Detuning.
            seed: Random seed.
            out_dir: Output directory.
            tol: Integration tolerance.
            n: Number of samples.

        Returns:
            None.
        """
        run = _load(
            config, gamma=gamma, rabi=rabi, xi=xi, delta=delta,
            seed=seed, out_dir=out_dir, tol=tol,
        )
        p = run.scaled_params()
        count = n or run.samples
        try:
            tau = sample_waiting_times(p, count, run.seed, run.tol)
            quadrature = mean_waiting_time_numeric(p, run.tol)
        except PhotonWindowError as e:
            typer.echo(f"{type(e).__name__}: {e}", err=True)
            raise typer.Exit(code=1)
        spec = p.dict() | {"xi": p.xi, "n": count, "tol": run.tol}
        path = write_table(
            pd.DataFrame({"tau": tau}),
            run.out_dir / "samples.csv",
            RunManifest.create("sample", spec, seed=run.seed),
        )
        report = {
            "samples": str(path),
            "n": count,
            "mean": float(np.mean(tau)),
            "standard_error": float(np.std(tau, ddof=1) / math.sqrt(count))
            if count > 1
            else math.nan,
            "quadrature_mean": quadrature,
        }
        SweepAPI.report(report)
