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

"""The verification suites, run the way ``galrep verify`` runs them."""

import pytest
from click.testing import CliRunner

from galrep.cli import cli
from galrep.suites import SUITES, registered_checks, run_suite


def test_every_suite_has_checks() -> None:
    for suite in SUITES:
        assert registered_checks(suite), f"suite {suite} is empty"


@pytest.mark.slow
@pytest.mark.parametrize("suite", SUITES)
def test_suite_passes(suite: str) -> None:
    """Each suite reports no failures; failing checks are listed in the assertion."""
    report = run_suite(suite)  # type: ignore[arg-type]
    failures = [f"{c.name}: {c.detail}" for c in report.checks if not c.passed]
    assert report.ok, failures
    assert report.passed == len(registered_checks(suite))  # type: ignore[arg-type]


@pytest.mark.slow
def test_verify_command_prints_counts() -> None:
    result = CliRunner().invoke(cli, ["verify", "--suite", "ecq"])
    assert result.exit_code == 0, result.output
    assert f"passed: {len(registered_checks('ecq'))}, failed: 0" in result.output
