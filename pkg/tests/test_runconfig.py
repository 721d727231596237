"""Copyright (c) 2023 Genome Research Ltd.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from pathlib import Path

import pytest

from photon_window.errors import ConfigParse
from photon_window.runconfig import (
    Engine,
    Variable,
    flag_overrides,
    load_config,
    parse_config,
)
from photon_window.sweep import SweepSpec


def test_defaults() -> None:
    config = load_config(None)
    p = config.scaled_params()
    assert (p.gamma, p.rabi, p.xi) == (0.5, 0.1, 0.0)
    assert config.engines == [Engine.ODE, Engine.RG_WEAK]
    assert config.out_dir == Path(".")


def test_load_file(configs) -> None:
    config = load_config(configs / "default.json")
    assert config.seed == 7
    assert config.scaled_params().xi == 1.0
    grid = SweepSpec.from_config(config).grid()
    assert list(grid) == pytest.approx([0.0, 0.1, 0.2])


def test_physical_block(configs) -> None:
    config = load_config(configs / "physical.json")
    p = config.scaled_params()
    assert p.gamma == pytest.approx(1.0 / 7.0)
    assert (p.rabi, p.xi) == (0.04, 1.14)
    assert config.sweep.variable is Variable.DELTA


def test_overrides(configs) -> None:
    overrides = flag_overrides(gamma=0.25, delta=0.5, engine=[Engine.BLOCH])
    config = load_config(configs / "default.json", overrides)
    p = config.scaled_params()
    assert (p.gamma, p.rabi, p.detuning) == (0.25, 0.1, 0.5)
    assert config.engines == [Engine.BLOCH]


def test_flag_overrides_skip_unset() -> None:
    assert flag_overrides() == {}
    assert flag_overrides(seed=0, out_dir=Path("out")) == {
        "out_dir": "out",
        "seed": 0,
    }


def test_unknown_key(configs) -> None:
    with pytest.raises(ConfigParse) as e:
        load_config(configs / "unknown_key.json")
    assert e.value.key == "colour"
    assert e.value.line == 3
    assert "colour" in str(e.value)


def test_malformed(configs) -> None:
    with pytest.raises(ConfigParse) as e:
        load_config(configs / "malformed.json")
    assert e.value.line == 3
    assert e.value.column is not None


def test_invalid_value() -> None:
    with pytest.raises(ConfigParse) as e:
        parse_config('{"params": {"gamma": -1}}')
    assert e.value.key.endswith("gamma")


def test_invalid_sweep() -> None:
    with pytest.raises(ConfigParse):
        parse_config('{"sweep": {"lo": 1, "hi": 0}}')


def test_not_an_object() -> None:
    with pytest.raises(ConfigParse):
        parse_config("[1, 2]")


def test_missing_file(tmp_path) -> None:
    with pytest.raises(ConfigParse):
        load_config(tmp_path / "missing.json")


def test_variable_field() -> None:
    assert Variable.DELTA.field == "detuning"
    assert Variable.XI.field == "xi"
