"""Copyright (c) 2023 Genome Research Ltd.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.

Run configuration: a JSON file merged with command line overrides.

    {
      "physical": {"units": "MHz", "omega_rf": 140, "gamma": 20},
      "params": {"rabi": 0.04, "xi": 1.14},
      "sweep": {"variable": "delta", "lo": -2, "hi": 2, "step": 0.02},
      "engines": ["rg_strong", "bloch"],
      "seed": 0,
      "out_dir": "out"
    }

`physical` is optional and converted to rf units first; `params` fields
override it.
"""

import json
import re
from enum import Enum
from pathlib import Path
from typing import Any, Literal, Optional

from mergedeep import merge
from pydantic import BaseModel, Extra, ValidationError, root_validator

from .errors import ConfigParse
from .model import PhysicalParams, ScaledParams, scale_to_rf_units


class Engine(str, Enum):
    """Computation engine of a sweep column."""

    ODE = "ode"
    RG_WEAK = "rg_weak"
    RG_DETUNED = "rg_detuned"
    RG_STRONG = "rg_strong"
    BLOCH = "bloch"


class Variable(str, Enum):
    """Swept parameter."""

    XI = "xi"
    GAMMA = "gamma"
    DELTA = "delta"
    RABI = "rabi"

    @property
    def field(self) -> str:
        """Name of the ScaledParams field moved by this variable."""
        return "detuning" if self is Variable.DELTA else self.value


class _Strict(BaseModel):
    class Config:
        """Model config."""

        extra = Extra.forbid


class PhysicalBlock(_Strict):
    """Parameters in cyclic MHz, converted at load time."""

    units: Literal["MHz"] = "MHz"
    omega_rf: float
    gamma: float = 0.0
    rabi: float = 0.0
    detuning: float = 0.0
    v_g: float = 0.0
    v_e: float = 0.0

    def scaled(self) -> ScaledParams:
        """Convert to rf units."""
        rates = self.dict(exclude={"units"})
        return scale_to_rf_units(PhysicalParams.from_cyclic(**rates))


class ParamsBlock(_Strict):
    """Parameters in rf units; unset fields keep their defaults."""

    gamma: float = 0.5
    rabi: float = 0.1
    xi: float = 0.0
    detuning: float = 0.0
    v_g: float = 0.0


class SweepBlock(_Strict):
    """Grid of the swept variable."""

    variable: Variable = Variable.XI
    lo: float = 0.0
    hi: float = 8.0
    step: float = 0.05

    @root_validator(skip_on_failure=True)
    def _check_range(cls, values: dict[str, Any]) -> dict[str, Any]:
        if not values["lo"] < values["hi"]:
            raise ValueError("sweep.lo must be below sweep.hi")
        if not values["step"] > 0:
            raise ValueError("sweep.step must be positive")
        return values


class RunConfig(_Strict):
    """Complete run configuration."""

    physical: Optional[PhysicalBlock] = None
    params: ParamsBlock = ParamsBlock()
    sweep: SweepBlock = SweepBlock()
    engines: list[Engine] = [Engine.ODE, Engine.RG_WEAK]
    seed: int = 0
    tol: Optional[float] = None
    t_end: float = 200.0
    samples: int = 100000
    out_dir: Path = Path(".")

    def scaled_params(self) -> ScaledParams:
        """Parameters in rf units, `params` overriding `physical`."""
        base = (
            self.physical.scaled()
            if self.physical is not None
            else ScaledParams.create(**ParamsBlock().dict())
        )
        changes = self.params.dict(exclude_unset=True)
        if "v_g" in changes:
            changes.setdefault("xi", base.xi)
        return base.replace(**changes)


def _position(text: str, key: str) -> tuple[Optional[int], Optional[int]]:
    match = re.search(rf'"{re.escape(key)}"\s*:', text)
    if match is None:
        return None, None
    line = text.count("\n", 0, match.start()) + 1
    column = match.start() - (text.rfind("\n", 0, match.start()) + 1) + 1
    return line, column


def _config_error(error: ValidationError, text: str) -> ConfigParse:
    first = error.errors()[0]
    key = ".".join(str(part) for part in first["loc"])
    leaf = str(first["loc"][-1])
    line, column = _position(text, leaf)
    if first["type"] == "value_error.extra":
        return ConfigParse(f"unknown key {key!r}", line, column, key)
    return ConfigParse(f"{key}: {first['msg']}", line, column, key)


def parse_config(
    text: str, overrides: Optional[dict[str, Any]] = None
) -> RunConfig:
    """Parse a JSON configuration and apply overrides.

    Args:
        text: JSON document, an object.
        overrides: Nested values merged over the document.

    Returns:
        RunConfig: The validated configuration.

    Raises:
        ConfigParse: Malformed JSON, an unknown key or an invalid value.
    """
    try:
        data = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as e:
        raise ConfigParse(e.msg, e.lineno, e.colno) from e
    if not isinstance(data, dict):
        raise ConfigParse("configuration must be a JSON object", 1, 1)
    merge(data, overrides or {})
    try:
        config = RunConfig.parse_obj(data)
        config.scaled_params()
    except ValidationError as e:
        raise _config_error(e, text) from e
    except ValueError as e:
        raise ConfigParse(str(e)) from e
    return config


def load_config(
    path: Optional[Path], overrides: Optional[dict[str, Any]] = None
) -> RunConfig:
    """Load a configuration file, or the defaults when no path is given.

    Args:
        path: JSON file.
        overrides: Nested values merged over the file.

    Returns:
        RunConfig: The validated configuration.
    """
    if path is None:
        return parse_config("", overrides)
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigParse(f"cannot read {path}: {e.strerror}") from e
    return parse_config(text, overrides)


def flag_overrides(
    gamma: Optional[float] = None,
    rabi: Optional[float] = None,
    xi: Optional[float] = None,
    delta: Optional[float] = None,
    engine: Optional[list[Engine]] = None,
    out_dir: Optional[Path] = None,
    seed: Optional[int] = None,
    tol: Optional[float] = None,
) -> dict[str, Any]:
    """Nested overrides from command line flags that were given.

    Returns:
        dict[str, Any]: Overrides for parse_config.
    """
    params = {
        name: value
        for name, value in (
            ("gamma", gamma),
            ("rabi", rabi),
            ("xi", xi),
            ("detuning", delta),
        )
        if value is not None
    }
    top: dict[str, Any] = {
        name: value
        for name, value in (
            ("out_dir", str(out_dir) if out_dir else None),
            ("seed", seed),
            ("tol", tol),
        )
        if value is not None
    }
    if engine:
        top["engines"] = [Engine(e).value for e in engine]
    if params:
        top["params"] = params
    return top
