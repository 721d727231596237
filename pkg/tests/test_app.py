"""Copyright (c) 2023 Genome Research Ltd.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from photon_window.app import Application, app
from photon_window.config.settings import Settings
from photon_window.sweep import SweepAPI


def test_register_api(capsys) -> None:
    class TestAPI:
        pass

    app = Application()
    app.register_api(TestAPI)
    captured = capsys.readouterr()
    assert (
        f"type object '{TestAPI.__name__}' has no attribute" in captured.out
    )  # noqa: E501, W503


def test_register_api_twice() -> None:
    before = len(app.commands.registered_commands)
    SweepAPI.register()
    assert len(app.commands.registered_commands) == before


def test_singleton() -> None:
    assert Application() is app


def test_jobs_setting_wins(monkeypatch) -> None:
    monkeypatch.setitem(app.settings.__dict__, "jobs", 3)
    assert app.jobs(8) == 3


def test_jobs_requested(monkeypatch) -> None:
    monkeypatch.setitem(app.settings.__dict__, "jobs", None)
    assert app.jobs(2) == 2
    assert app.jobs() >= 1


def test_api_report(capsys) -> None:
    SweepAPI.report({"rows": 3, "errors": {}})
    assert capsys.readouterr().out == "rows: 3\nerrors: {}\n"


def test_user_config(monkeypatch, tmp_path) -> None:
    path = tmp_path / "config.yml"
    path.write_text("dynamics:\n  rtol: 1.0e-10\n")
    monkeypatch.setenv("PHOTON_WINDOW_CONFIG", str(path))
    settings = Settings.parse_obj({})
    assert settings.dynamics.rtol == 1e-10
    assert settings.dynamics.atol == 1e-12


def test_env_jobs(monkeypatch) -> None:
    monkeypatch.setenv("PHOTON_WINDOW_JOBS", "4")
    assert Settings.parse_obj({}).jobs == 4
