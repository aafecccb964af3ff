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

"""Pydantic payloads shared by every report the package emits."""

from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

Status = Literal["Satisfied", "Violated", "Undetermined"]

SCHEMA_ID = "galrep-report/1"


class AbelianPGroupType(BaseModel):
    """Isomorphism type of a finite abelian p-group, ⊕ Z/p^{e_i}."""

    model_config = ConfigDict(frozen=True)

    p: int
    exponents: tuple[int, ...] = ()

    @field_validator("exponents")
    @classmethod
    def _canonical(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if any(e <= 0 for e in value):
            raise ValueError(f"exponents must be positive, got {value}")
        return tuple(sorted(value, reverse=True))

    @classmethod
    def trivial(cls, p: int) -> "AbelianPGroupType":
        return cls(p=p, exponents=())

    @classmethod
    def cyclic(cls, p: int, exponent: int) -> "AbelianPGroupType":
        return cls(p=p, exponents=(exponent,) if exponent > 0 else ())

    @property
    def is_trivial(self) -> bool:
        return not self.exponents

    @property
    def rank(self) -> int:
        """Number of cyclic summands, i.e. dim over F_p of G/pG."""
        return len(self.exponents)

    @property
    def order(self) -> int:
        return self.p ** sum(self.exponents)

    def count_below(self, level: int) -> int:
        return sum(1 for e in self.exponents if e < level)

    def count_at(self, level: int) -> int:
        return sum(1 for e in self.exponents if e == level)

    def __add__(self, other: "AbelianPGroupType") -> "AbelianPGroupType":
        if other.p != self.p:
            raise ValueError("cannot add p-groups for different primes")
        return AbelianPGroupType(p=self.p, exponents=self.exponents + other.exponents)

    def __str__(self) -> str:
        if self.is_trivial:
            return "0"
        parts = []
        for e in sorted(set(self.exponents), reverse=True):
            mult = self.exponents.count(e)
            term = f"Z/{self.p ** e}"
            parts.append(term if mult == 1 else f"({term})^{mult}")
        return " ⊕ ".join(parts)


class TraceStep(BaseModel):
    """One cited statement in a derivation, with the quantities computed for it."""

    key: str = Field(description="Stable key such as 'tate-inertia-invariants' or 'ordinary-case-table'.")
    statement: str
    values: dict[str, Any] = Field(default_factory=dict)


class ReportEnvelope(BaseModel):
    """Top-level JSON document written by every CLI command."""

    model_config = ConfigDict(populate_by_name=True)

    schema_id: Literal["galrep-report/1"] = Field(default=SCHEMA_ID, alias="schema")
    command: str
    inputs: dict[str, Any] = Field(default_factory=dict)
    result: dict[str, Any] = Field(default_factory=dict)
    trace: list[TraceStep] = Field(default_factory=list)
    exit_status: int = 0
    generated_at: str = ""

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)
