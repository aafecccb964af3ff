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

"""Exception hierarchy; each error carries the CLI exit status it maps to."""

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_UNDETERMINED = 2
EXIT_USAGE = 64


class GalrepError(Exception):
    """Root of every error raised by galrep."""

    exit_code: int = EXIT_VIOLATED


class InvalidParams(GalrepError, ValueError):
    exit_code = EXIT_USAGE


class InvalidModulus(InvalidParams):
    pass


class InvalidJ(InvalidParams):
    pass


class InvalidCase(InvalidParams):
    pass


class SmallPrimeUnsupported(InvalidParams):
    pass


class SingularCurve(InvalidParams):
    pass


class BadReduction(InvalidParams):
    pass


class NotNormal(InvalidParams):
    pass


class NotPrimeToP(InvalidParams):
    pass


class CapExceeded(GalrepError):
    """A group closure or cochain system grew past its configured cap."""

    exit_code = EXIT_UNDETERMINED


class BudgetExceeded(GalrepError):
    """An enumeration would exceed the configured budget."""

    exit_code = EXIT_UNDETERMINED


class InconsistentAction(GalrepError):
    """Generator images do not define a homomorphism on the closure."""


class ModelInvariantError(GalrepError):
    """A computed local invariant contradicts the closed form it must satisfy."""
