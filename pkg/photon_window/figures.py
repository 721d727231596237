"""Copyright (c) 2023 Genome Research Ltd.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.

Tables behind the four standard plots:

    fig1.csv  Γ⟨τ⟩(ξ) from the ODE and the weak-drive formula, Ω = 0.1
    fig2.csv  J_0(ξ) against the crossing function G(Γ, ξ)
    fig3.csv  relative shift of the first two maxima up to their folds
    fig4.csv  peak-normalized spectra from the strong-drive formula and
              the Bloch equations at ω_rf/2π = 140 MHz, Γ/2π = 20 MHz
"""

import math
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import pandas as pd
import typer
from typer import Typer
from typing_extensions import Annotated

from .api import API
from .app import app
from .logger import get_logger
from .model import PhysicalParams, ScaledParams, scale_to_rf_units
from .output import RunManifest, write_table
from .resonance import (
    PairClosing,
    PairState,
    PairTracker,
    find_critical_point,
    small_gamma_shift,
)
from .runconfig import Engine, Variable
from .series import bessel_j, bessel_zeros, crossing_function
from .sweep import SweepSpec, run_sweep

logger = get_logger(__name__)

FIG1_RABI = 0.1
FIG1_GAMMAS = (0.5, 1.5, 3.0)
FIG2_GAMMAS = (1.0, 2.5)
FIG3_PAIRS = (1, 2)
FIG4_XI = 1.14
FIG4_DRIVES = (0.29, 0.9, 3.2)


def fig4_params() -> ScaledParams:
    """Experimental parameters of the spectra, converted from MHz."""
    physical = PhysicalParams.from_cyclic(omega_rf=140.0, gamma=20.0)
    return scale_to_rf_units(physical).replace(xi=FIG4_XI)


def _column(name: str, value: float) -> str:
    return f"{name}_{value:g}"


def fig1_table(jobs: Optional[int] = None) -> pd.DataFrame:
    """Scaled mean waiting time Γ⟨τ⟩ over ξ ∈ [0, 8] for three Γ."""
    table = pd.DataFrame()
    for gamma in FIG1_GAMMAS:
        spec = SweepSpec(
            variable=Variable.XI,
            lo=0.0,
            hi=8.0,
            step=0.05,
            fixed=ScaledParams.create(gamma=gamma, rabi=FIG1_RABI),
            engines=[Engine.ODE, Engine.RG_WEAK],
        )
        frame = run_sweep(spec, jobs)
        table["xi"] = frame["xi"]
        for engine in spec.engines:
            table[_column(f"gamma_tau_{engine.value}", gamma)] = (
                gamma * frame[f"tau_{engine.value}"]
            )
    return table


def fig2_table() -> pd.DataFrame:
    """J_0 and G(Γ, ξ) on ξ ∈ [0.01, 8]; G is infinite at zeros of J_1."""
    xi = 0.01 * np.arange(1, 801)
    table = pd.DataFrame({"xi": xi, "j0": [bessel_j(0, x) for x in xi]})
    for gamma in FIG2_GAMMAS:
        table[_column("g", gamma)] = [
            crossing_function(x, gamma) for x in xi
        ]
    return table


def fig3_table() -> pd.DataFrame:
    """Relative shift (ξ − ξ_n)/ξ_n of the maxima, ending at their folds.

    The small-Γ prediction is filled in only where it is meant to hold.
    """
    small = app.settings.resonance.small_gamma
    rows = []
    for n in FIG3_PAIRS:
        xi_n = float(bessel_zeros(0, n)[-1])
        for item in PairTracker(n).follow():
            if isinstance(item, PairClosing):
                break
            state: PairState = item
            predicted = (
                small_gamma_shift(n, state.gamma) / xi_n
                if state.gamma <= small
                else math.nan
            )
            rows.append(
                {
                    "n": n,
                    "gamma": state.gamma,
                    "xi_max": state.xi_max,
                    "relative_shift": (state.xi_max - xi_n) / xi_n,
                    "predicted_shift": predicted,
                    "critical": 0,
                }
            )
        critical = find_critical_point(n)
        rows.append(
            {
                "n": n,
                "gamma": critical.gamma_cr,
                "xi_max": critical.xi_cr,
                "relative_shift": (critical.xi_cr - xi_n) / xi_n,
                "predicted_shift": math.nan,
                "critical": 1,
            }
        )
    return pd.DataFrame(rows)


def _normalized(values: pd.Series) -> pd.Series:
    peak = values.max()
    return values / peak if peak > 0 else values


def fig4_table(
    jobs: Optional[int] = None,
    step: float = 0.02,
    drives: tuple[float, ...] = FIG4_DRIVES,
) -> pd.DataFrame:
    """Peak-normalized rates over δ ∈ [−2, 2] for Ω/Γ ∈ {0.29, 0.9, 3.2}.

    Args:
        jobs: Parallel workers.
        step: Detuning step.
        drives: Rabi frequencies in units of Γ.

    Returns:
        DataFrame: delta, then one column per drive and engine.
    """
    base = fig4_params()
    table = pd.DataFrame()
    for drive in drives:
        spec = SweepSpec(
            variable=Variable.DELTA,
            lo=-2.0,
            hi=2.0,
            step=step,
            fixed=base.replace(rabi=drive * base.gamma),
            engines=[Engine.RG_STRONG, Engine.BLOCH],
        )
        frame = run_sweep(spec, jobs)
        table["delta"] = frame["delta"]
        for engine in spec.engines:
            table[_column(f"rate_{engine.value}", drive)] = _normalized(
                frame[f"rate_{engine.value}"]
            )
    return table


_FIGURES: dict[int, Callable[[Optional[int]], pd.DataFrame]] = {
    1: fig1_table,
    2: lambda jobs: fig2_table(),
    3: lambda jobs: fig3_table(),
    4: fig4_table,
}


def emit_figure_data(
    figure_id: int, out_dir: Path = Path("."), jobs: Optional[int] = None
) -> list[Path]:
    """Write `fig<id>.csv` with its manifest.

    Args:
        figure_id: One of 1, 2, 3, 4.
        out_dir: Output directory.
        jobs: Parallel workers for the sweeps of figures 1 and 4.

    Returns:
        list[Path]: The written tables.
    """
    if figure_id not in _FIGURES:
        raise ValueError(f"figure_id must be 1, 2, 3 or 4, got {figure_id}")
    logger.info("Computing data of figure %d", figure_id)
    table = _FIGURES[figure_id](jobs)
    path = write_table(
        table,
        Path(out_dir) / f"fig{figure_id}.csv",
        RunManifest.create("figure", {"figure_id": figure_id}),
    )
    return [path]


class FigureAPI(API):
    """Figure data commands."""

    commands = Typer(help="Figure data.")

    @staticmethod
    @commands.command("figure", help="Write the data of figure 1, 2, 3 or 4.")
    def figure_command(
        figure_id: Annotated[int, typer.Argument(help="Figure number.")],
        out_dir: Annotated[
            Path, typer.Option(help="Output directory.")
        ] = Path("."),
        jobs: Annotated[
            Optional[int], typer.Option(help="Parallel workers.")
        ] = None,
    ) -> None:
        """Write fig<id>.csv and print its path.

        Args:
            figure_id: Figure number.
            out_dir: Output directory.
            jobs: Parallel workers.

        Returns:
            None.
        """
        if figure_id not in _FIGURES:
            typer.echo(f"unknown figure {figure_id}", err=True)
            raise typer.Exit(code=2)
        paths = emit_figure_data(figure_id, out_dir, jobs)
        FigureAPI.report({"tables": [str(p) for p in paths]})
