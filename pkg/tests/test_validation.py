"""Copyright (c) 2023 Genome Research Ltd.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

import pytest
import yaml
from box import Box
from pytest_cases import parametrize_with_cases

from photon_window.runconfig import load_config
from photon_window.validation import Report, Validator, validate


def test_params_divergent(configs) -> None:
    report = validate(configs / "gamma_zero.json", ["params"])
    assert not report.passed
    (criterion,) = report.criteria
    assert criterion.name == "params"
    assert criterion.detail.startswith("DivergentWaitingTime")


def test_params(configs) -> None:
    report = validate(configs / "default.json", ["params"])
    assert report.passed
    measured = report.criteria[0].measured
    assert measured["tau_ode"] == pytest.approx(
        measured["tau_rg_weak"], rel=0.12
    )


def test_properties() -> None:
    criterion = Validator(load_config(None)).properties()
    assert criterion.passed, criterion.measured


def test_properties_follow_run_seed(configs) -> None:
    config = load_config(configs / "default.json")
    assert config.seed == 7
    criterion = Validator(config).properties()
    assert criterion.passed, criterion.measured


def test_fig2() -> None:
    criterion = Validator(load_config(None)).fig2()
    assert criterion.passed, criterion.measured


class ReducedChecks:
    def case_fig1(self):
        return lambda v: v.fig1(step=0.1, gammas=(0.5,))

    def case_fig3(self):
        return lambda v: v.fig3(pairs=(2,), argmax_gammas=(1.0,))

    def case_fig4(self):
        return lambda v: v.fig4(step=0.1, drives=(0.29, 3.2))

    def case_sampler(self):
        return lambda v: v.sampler(n=20000)


@parametrize_with_cases("check", cases=ReducedChecks)
def test_reduced_check(check) -> None:
    criterion = check(Validator(load_config(None)))
    assert criterion.passed, criterion.measured


def test_fig3_reports_fold_merge() -> None:
    criterion = Validator(load_config(None)).fig3(
        pairs=(1,), argmax_gammas=()
    )
    assert criterion.passed, criterion.measured
    fold = criterion.measured["folds"][1]
    assert fold["merges"] is True
    assert fold["gamma_cr"] == pytest.approx(1.70850, abs=1e-4)
    assert fold["xi_cr"] == pytest.approx(3.27574, abs=1e-4)


def test_unknown_criterion() -> None:
    with pytest.raises(ValueError):
        Validator(load_config(None)).run(["fig9"])


def test_empty_report() -> None:
    assert Report().passed


def test_validate_command_failure(cli, configs) -> None:
    result = cli.invoke(
        [
            "validate",
            "--config",
            str(configs / "gamma_zero.json"),
            "--criterion",
            "params",
        ]
    )
    assert result.exit_code == 1
    report = Box(yaml.safe_load(result.stdout))
    assert report.passed is False
    assert "DivergentWaitingTime" in report.criteria[0].detail


def test_validate_command_config_error(cli, configs) -> None:
    result = cli.invoke(
        ["validate", "--config", str(configs / "unknown_key.json")]
    )
    assert result.exit_code == 2
    assert "colour" in result.output


def test_validate_command_malformed(cli, configs) -> None:
    result = cli.invoke(
        ["validate", "--config", str(configs / "malformed.json")]
    )
    assert result.exit_code == 2
    assert "line 3" in result.output
