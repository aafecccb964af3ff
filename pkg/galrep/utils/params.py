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

import datetime
import logging
from pathlib import Path

from galrep.errors import InvalidParams
from galrep.utils.typing import ReportEnvelope


def parse_key_values(pairs_string: str | None) -> dict[str, str]:
    """Parse model parameters from a comma-separated KEY=VALUE string.

    Args:
        pairs_string: Comma-separated list of parameters such as "p=5,n=2,t=1"

    Returns:
        Dictionary of parameters with keys and values stripped of whitespace
    """
    params = {}
    if pairs_string:
        for pair in pairs_string.split(","):
            if "=" in pair:
                key, value = pair.split("=", 1)
                params[key.strip()] = value.strip()
            else:
                logging.warning(f"Skipping malformed parameter pair: {pair}")
    return params


def parse_curve(curve_string: str) -> tuple[int, int, int, int, int]:
    """Parse Weierstrass coefficients given as "a1,a2,a3,a4,a6".

    Raises:
        InvalidParams: if there are not exactly five decimal integers
    """
    parts = [part.strip() for part in curve_string.split(",")]
    if len(parts) != 5:
        raise InvalidParams(
            f"curve must have five coefficients a1,a2,a3,a4,a6, got {curve_string!r}"
        )
    try:
        a1, a2, a3, a4, a6 = (int(part) for part in parts)
    except ValueError as exc:
        raise InvalidParams(f"curve coefficients must be integers: {exc}") from exc
    return a1, a2, a3, a4, a6


def stamp(envelope: ReportEnvelope) -> ReportEnvelope:
    """Return a copy of the envelope carrying the current timestamp."""
    return envelope.model_copy(
        update={"generated_at": datetime.datetime.now().isoformat()}
    )


def write_report(envelope: ReportEnvelope, report_file: str | Path) -> None:
    """Write a report envelope to a JSON file.

    Args:
        envelope: The report to serialize
        report_file: Path to write the JSON file
    """
    with open(report_file, "w") as f:
        f.write(envelope.to_json())

    logging.info(f"Report for '{envelope.command}' written to {report_file}")
