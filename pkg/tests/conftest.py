"""Copyright (c) 2023 Genome Research Ltd.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from pathlib import Path

import pytest
from typer.testing import CliRunner

import photon_window.main  # noqa: F401
from photon_window.app import app
from photon_window.model import ScaledParams

DATA = Path(__file__).parent / "data"


@pytest.fixture(autouse=True)
def patch_settings(monkeypatch):
    monkeypatch.setitem(app.settings.__dict__, "jobs", 1)
    yield app.settings


class CLI:
    def __init__(self):
        self.runner = CliRunner()

    def invoke(self, *args, **kwargs):
        return self.runner.invoke(app.commands, *args, **kwargs)


@pytest.fixture
def cli() -> CLI:
    return CLI()


@pytest.fixture
def configs() -> Path:
    return DATA / "configs"


@pytest.fixture
def weak() -> ScaledParams:
    return ScaledParams.create(gamma=0.5, rabi=0.1, xi=1.0)


@pytest.fixture
def goldens() -> Path:
    return DATA
