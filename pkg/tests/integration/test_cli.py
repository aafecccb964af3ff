# Copyright 2025 Google LLC
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""End-to-end runs of the galrep command line."""

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from galrep import config as config_module
from galrep.cli import cli, main


@pytest.fixture
def runner() -> CliRunner:
    """Fixture providing a click test runner"""
    return CliRunner()


def _json_run(capsys: pytest.CaptureFixture[str], argv: list[str]) -> tuple[int, dict]:
    status = main([*argv, "--format", "json"])
    return status, json.loads(capsys.readouterr().out)


def test_check_37a1_emits_conclusion(runner: CliRunner) -> None:
    """
    All four hypotheses hold for 37a1 at p = 5, j = 2, so the conditional
    conclusion is printed and the exit status is 0.
    """
    result = runner.invoke(cli, ["check", "--curve", "0,0,1,-1,0", "--p", "5", "--j", "2", "--sha-dim", "3"])
    assert result.exit_code == 0, result.output
    assert "conclusion: Cl_K ⊗ F_p admits Sym^j E[p]" in result.output
    assert "conditional on the supplied Sha dimension" in result.output


def test_check_37a1_without_sha_dimension(runner: CliRunner) -> None:
    result = runner.invoke(cli, ["check", "--curve", "0,0,1,-1,0", "--p", "5", "--j", "2"])
    assert result.exit_code == 0
    assert "supply --sha-dim ≥ 3" in result.output


def test_check_11a1_reports_violation(runner: CliRunner) -> None:
    result = runner.invoke(cli, ["check", "--curve", "0,-1,1,-10,-20", "--p", "5", "--j", "1"])
    assert result.exit_code == 1
    assert "(c′) violated at l=11" in result.output


def test_local_tate_both_methods_agree(runner: CliRunner) -> None:
    result = runner.invoke(
        cli, ["local", "--model", "tate", "--p", "5", "--n", "1", "--j", "2", "--t", "0", "--method", "both"]
    )
    assert result.exit_code == 0, result.output
    assert "closed form and kernel computation agree" in result.output
    assert "limit_quotient_dim: 0" in result.output


def test_local_parameters_from_pairs(capsys: pytest.CaptureFixture[str]) -> None:
    status, data = _json_run(capsys, ["local", "--model", "tate", "--params", "p=5,n=2,j=2,t=1", "--method", "both"])
    assert status == 0
    assert data["result"]["level_structure_text"] == "Z/25 ⊕ (Z/5)^2"
    assert data["result"]["limit_quotient_dim"] == 2
    assert data["result"]["cross_check"]["agrees"] is True


def test_local_ordinary_reports_bound(capsys: pytest.CaptureFixture[str]) -> None:
    status, data = _json_run(
        capsys, ["local", "--model", "ordinary", "--p", "5", "--n", "2", "--j", "1", "--cm", "--s", "1"]
    )
    assert status == 0
    assert data["result"]["case"] == "B"
    assert (data["result"]["bound"]["raw"], data["result"]["bound"]["bound"]) == (2, 1)


def test_local_potentially_good_image(capsys: pytest.CaptureFixture[str]) -> None:
    status, data = _json_run(
        capsys,
        ["local", "--model", "potgood", "--p", "5", "--n", "2", "--j", "1", "--image", "[[[7,0],[0,18]]]"],
    )
    assert status == 0
    assert data["result"]["limit_quotient_dim"] == 0
    assert data["result"]["level_structure_text"] == "0"


def test_json_and_text_report_the_same_verdicts(
    runner: CliRunner, capsys: pytest.CaptureFixture[str]
) -> None:
    argv = ["check", "--curve", "0,-1,1,-10,-20", "--p", "5", "--j", "1"]
    status, data = _json_run(capsys, argv)
    text = runner.invoke(cli, argv).output
    assert status == 1
    assert data["schema"] == "galrep-report/1"
    assert data["exit_status"] == 1
    for verdict in data["result"]["verdicts"]:
        assert f"({verdict['hypothesis']}) {verdict['status']}: {verdict['evidence']}" in text


def test_json_output_is_deterministic(capsys: pytest.CaptureFixture[str]) -> None:
    argv = ["check", "--curve", "0,0,1,-1,0", "--p", "5", "--j", "2", "--sha-dim", "3"]
    _, first = _json_run(capsys, argv)
    _, second = _json_run(capsys, argv)
    first.pop("generated_at")
    second.pop("generated_at")
    assert first == second


def test_report_file_is_written(runner: CliRunner, tmp_path: Path) -> None:
    report_file = tmp_path / "local.json"
    result = runner.invoke(
        cli,
        ["local", "--model", "ss", "--p", "7", "--j", "2", "--method", "both", "--output", str(report_file)],
    )
    assert result.exit_code == 0
    data = json.loads(report_file.read_text())
    assert data["command"] == "local"
    assert data["result"]["bound"]["bound"] == 2


def test_cohomology_with_central_witness(capsys: pytest.CaptureFixture[str]) -> None:
    status, data = _json_run(capsys, ["cohomology", "--group", "gl2", "--p", "5", "--sym", "2", "--h2"])
    assert status == 0
    result = data["result"]
    assert result["h1"] == 0
    assert result["h2"] == 0
    assert result["h2_source"] == "vanishing witness"
    assert result["witness"]["description"] == "<2I>"
    assert result["irreducible"] is True


def test_cohomology_h2_without_witness_is_undetermined() -> None:
    assert main(["cohomology", "--group", "gl2", "--p", "5", "--sym", "4", "--h2"]) == 2


def test_usage_errors_exit_64(runner: CliRunner) -> None:
    assert main(["check", "--curve", "0,0,1,-1,0"]) == 64
    assert main(["local", "--model", "tate", "--p", "5", "--j", "4"]) == 64
    assert main(["local", "--model", "tate", "--p", "4", "--j", "1"]) == 64
    assert main(["check", "--curve", "0,0,0,0,0", "--p", "5", "--j", "1"]) == 64
    assert runner.invoke(cli, ["local", "--model", "nope"]).exit_code == 64
    assert runner.invoke(cli, ["local", "--model", "ordinary", "--p", "5", "--j", "1", "--m", "x"]).exit_code == 64


def test_budget_from_environment(runner: CliRunner) -> None:
    """GALREP_BUDGET shrinks the dense cochain budget below what the pairs method needs."""
    try:
        result = runner.invoke(
            cli,
            ["cohomology", "--group", "gl2", "--p", "3", "--sym", "1", "--method", "pairs"],
            env={"GALREP_BUDGET": "10"},
        )
    finally:
        config_module.reload_config()
    assert result.exit_code == 2
    assert config_module.config.budget != 10


def test_check_with_undetermined_hypothesis_exits_2(runner: CliRunner) -> None:
    """y^2 = x^3 + 1 has CM, so the sieve cannot exclude a Cartan normalizer at p = 7."""
    result = runner.invoke(cli, ["check", "--curve", "0,0,0,0,1", "--p", "7", "--j", "1"])
    assert result.exit_code == 2, result.output
    assert "(d′) Undetermined" in result.output
    assert "exit status: 2" in result.output
